import numpy as np
import pytest
from scipy import stats

from dgassoc.corpus import parse_corpus
from dgassoc.dataset import GoldStandard
from dgassoc.synth import SynthConfig, generate, generate_corpus, read_truth


def _cooc_rates(docs, gold, n_diseases, n_genes):
    diseases = [f"DIS{i:03d}" for i in range(n_diseases)]
    genes = [f"GENE{i:04d}" for i in range(n_genes)]
    counts = np.zeros((n_diseases, n_genes))
    d_idx = {d: i for i, d in enumerate(diseases)}
    g_idx = {g: i for i, g in enumerate(genes)}
    for doc in docs:
        for d in doc.diseases:
            for g in doc.genes:
                counts[d_idx[d], g_idx[g]] += 1
    true = np.zeros_like(counts, dtype=bool)
    for p in gold.associations:
        true[d_idx[p.disease], g_idx[p.gene]] = True
    return counts[true] / len(docs), counts[~true] / len(docs)


@pytest.mark.parametrize("field, value", [
    ("n_docs", 0), ("n_genes", 0), ("n_diseases", 0), ("noise_rate", 1.5), ("assoc_density", -0.1),
])
def test_config_rejects(field, value):
    with pytest.raises(ValueError):
        SynthConfig(**{field: value})


def test_same_seed_byte_identical(tmp_path):
    cfg = SynthConfig(n_docs=40, seed=7)
    a = generate(cfg, tmp_path / "a")
    b = generate(cfg, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    c = generate(SynthConfig(n_docs=40, seed=8), tmp_path / "c")
    assert c[0].read_bytes() != a[0].read_bytes()


def test_outputs_consistent(tmp_path):
    corpus, gold_path, truth_path = generate(SynthConfig(n_docs=60, seed=1), tmp_path)
    docs = parse_corpus(corpus)  # validates every event
    gold = GoldStandard.load(gold_path)
    seen_d = {d for doc in docs for d in doc.diseases}
    seen_g = {g for doc in docs for g in doc.genes}
    assert all(p.disease in seen_d and p.gene in seen_g for p in gold.associations)
    truth = read_truth(truth_path)
    assert int(truth["documents"]) == len(docs) == 60
    assert int(truth["gold_associations"]) == len(gold)
    assert int(truth["cooccurrence_total"]) == sum(len(d.diseases) * len(d.genes) for d in docs)
    assert all(doc.genes for doc in docs)


def test_null_signal_rates_equal():
    cfg = SynthConfig(n_docs=3000, signal_strength=0.0, seed=11)
    docs, gold, _ = generate_corpus(cfg)
    true_rate, false_rate = _cooc_rates(docs, gold, cfg.n_diseases, cfg.n_genes)
    assert len(true_rate) > 100
    assert stats.mannwhitneyu(true_rate, false_rate).pvalue > 0.01


def test_default_signal_separates():
    cfg = SynthConfig()
    docs, gold, _ = generate_corpus(cfg)
    true_rate, false_rate = _cooc_rates(docs, gold, cfg.n_diseases, cfg.n_genes)
    assert true_rate.mean() > 2 * false_rate.mean()
    assert stats.mannwhitneyu(true_rate, false_rate, alternative="greater").pvalue < 1e-6
