import numpy as np
import pytest

from onoma.corpus import Document, EmbeddedCorpus, TokenizedCorpus


def make_planted_corpus(n_topics=4, per_topic=45, dim=16, seed=7,
                        noise=0.08, with_tokens=True):
    """Direction-separated embedding blobs with topic-specific vocabularies.

    Returns (EmbeddedCorpus, ground-truth labels). Vectors are unit-norm so
    the blobs separate under the cosine metric.
    """
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_topics, dim))
    span = dim // n_topics
    for t in range(n_topics):
        centers[t, t * span:(t + 1) * span] = 1.0
    shared = [f"shared{j}" for j in range(5)]
    docs, vecs, labels = [], [], []
    for t in range(n_topics):
        vocab = [f"topic{t}word{j}" for j in range(6)]
        for i in range(per_topic):
            v = centers[t] + rng.normal(0, noise, dim)
            v /= np.linalg.norm(v)
            tokens = None
            if with_tokens:
                tokens = [str(w) for w in rng.choice(vocab, size=5)]
                tokens += [str(w) for w in rng.choice(shared, size=2)]
            docs.append(Document(id=f"d{t}-{i}", tokens=tokens))
            vecs.append(v)
            labels.append(t)
    corpus = EmbeddedCorpus(dim=dim, docs=docs,
                            vectors=np.array(vecs, dtype=np.float32))
    return corpus, np.array(labels)


def make_two_sense_corpus(per_sense=100, dim=16, seed=5, noise=0.05):
    """Two far-apart embedding blobs with per-instance object lemmas."""
    rng = np.random.default_rng(seed)
    vecs = np.concatenate([
        rng.normal(0.0, noise, size=(per_sense, dim)),
        rng.normal(1.0, noise, size=(per_sense, dim)),
    ]).astype(np.float32)
    objects = (
        ["shou"] * (per_sense * 6 // 10) + ["yan"] * (per_sense * 4 // 10)
        + ["xin"] * (per_sense * 7 // 10) + ["ganqing"] * (per_sense * 3 // 10)
    )
    docs = [Document(id=f"inst{i}") for i in range(2 * per_sense)]
    corpus = EmbeddedCorpus(dim=dim, docs=docs, vectors=vecs)
    truth = np.repeat([0, 1], per_sense)
    return corpus, truth, objects


@pytest.fixture(scope="session")
def planted_corpus():
    return make_planted_corpus()


@pytest.fixture(scope="session")
def two_sense_corpus():
    return make_two_sense_corpus()


@pytest.fixture(scope="session")
def planted_tokens(planted_corpus):
    corpus, _ = planted_corpus
    return TokenizedCorpus.from_docs([d.tokens for d in corpus.docs])


@pytest.fixture(scope="session")
def appendix_table_path():
    from importlib import resources

    return resources.files("onoma").joinpath("data/appendix_profile.csv")
