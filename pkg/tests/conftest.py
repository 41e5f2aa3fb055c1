import sys
from pathlib import Path

import numpy as np
import pytest

SCRIPTS_DIR = Path(__file__).resolve().parents[1] / "scripts"
if str(SCRIPTS_DIR) not in sys.path:
    sys.path.insert(0, str(SCRIPTS_DIR))

from turbgen.imagebuf import Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_image(rng):
    return Image(rng.random((32, 32, 3)))


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """112 soft natural 112x112 clean PNGs, shared across the session."""
    from make_corpus import build_corpus

    out = tmp_path_factory.mktemp("corpus")
    build_corpus(out, 112)
    return out
