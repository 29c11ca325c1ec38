import pytest

from infoflow.families import extension_family, reduction_family
from infoflow.sampling import random_model_corpus

CORPUS_SEED = 7
CORPUS_SIZE = 100


@pytest.fixture(scope="session")
def corpus():
    """The seeded audit corpus: 100 models, n in {2,3}, sizes in {2,3}."""
    return random_model_corpus(CORPUS_SEED, CORPUS_SIZE, max_inputs=3)


@pytest.fixture(scope="session")
def corpus_families(corpus):
    """Each corpus model with its extension and reduction families."""
    return [(m, extension_family(m), reduction_family(m)) for m in corpus]
