import pytest

from estc.embedding import fit_vocabulary
from estc.synthdata import make_demo_catalog


@pytest.fixture(scope="session")
def demo_catalog():
    return make_demo_catalog(n=50, seed=13)


@pytest.fixture(scope="session")
def demo_products(demo_catalog):
    return demo_catalog[0]


@pytest.fixture(scope="session")
def demo_pairs(demo_catalog):
    return demo_catalog[1]


@pytest.fixture(scope="session")
def demo_vocab(demo_catalog):
    products, pairs = demo_catalog
    corpus = ([p.title for p in products]
              + [p.ocr_text for p in products if p.ocr_text]
              + [pair.title.serialized() for pair in pairs])
    return fit_vocabulary(corpus, max_dim=2048, char_bigrams=True)
