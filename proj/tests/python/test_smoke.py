"""End-to-end smoke of the python bindings on a tiny synthetic dataset."""

import math

import pytest

import thgrl


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    spec = thgrl.SyntheticSpec()
    spec.shared_aspects = 2
    spec.specific_aspects = 3
    spec.products_per_domain = 10
    spec.sellers_per_domain = 4
    spec.customers = 30
    spec.signature_words_per_aspect = 8
    spec.noise_words = 30
    spec.reviews_per_domain = 120
    spec.words_per_review = 12
    spec.train_per_aspect = 5
    spec.seed = 31
    thgrl.synthesize(spec, out)
    return out


def test_graph_loads_and_reports_stats(dataset):
    graph = thgrl.load_graph(dataset / "vertices.tsv", dataset / "edges.tsv")
    assert graph.vertex_count > 0
    assert graph.edge_count > 0
    assert graph.type_of(graph.find("rt0")) == "Review"
    assert "vertices" in graph.stats()


def test_stagewise_chain(dataset, tmp_path):
    graph = thgrl.load_graph(dataset / "vertices.tsv", dataset / "edges.tsv")
    split = thgrl.load_split(graph, dataset / "reviews.tsv", dataset / "split.tsv")
    assert len(split.train) > 0 and len(split.test) > 0
    graph = thgrl.apply_leakage_filter(graph, split)
    graph = thgrl.build_word_aspect_edges(graph, split)

    wcfg = thgrl.WalkConfig()
    wcfg.walks_per_vertex = 2
    wcfg.walk_length = 8
    wcfg.seed = 7
    corpus = thgrl.generate_corpus(graph, wcfg)
    assert len(corpus.paths) == 2 * graph.vertex_count
    assert corpus.token_count > 0

    tcfg = thgrl.TracerConfig()
    tcfg.tracer_count = 4
    tcfg.gibbs_iterations = 25
    tcfg.burn_in = 5
    tcfg.seed = 7
    model = thgrl.fit_tracers(corpus, graph.vertex_count, tcfg)
    assert len(model.theta) == len(corpus.paths)
    for row in model.theta[:10]:
        assert math.isclose(sum(row), 1.0, abs_tol=1e-9)
    assert math.isfinite(thgrl.log_joint(model, corpus))

    assignments = thgrl.assign_tokens(model, corpus)
    ecfg = thgrl.EmbedConfig()
    ecfg.dimension = 16
    ecfg.context_window = 4
    ecfg.negatives = 3
    ecfg.seed = 7
    emb = thgrl.train_embeddings(corpus, assignments, graph.vertex_count,
                                 model.tracer_count, ecfg)
    assert len(emb.vertex_vector(0)) == 16
    assert len(emb.tracer_vector(0)) == 16

    posteriors = thgrl.vertex_tracer_posterior(model, corpus, assignments)
    table = thgrl.integrate(emb, posteriors)
    assert table.integrated and table.width == 32
    assert thgrl.vertex_only_table(emb).width == 16

    values, word_hits = thgrl.pool_review(graph, table, graph.find("rt0"))
    assert word_hits > 0 and len(values) == 32

    dcfg = thgrl.DetectConfig()
    dcfg.epochs = 30
    dcfg.seed = 7
    aspects = thgrl.load_aspects(graph, dataset / "aspects.txt")
    train_f, test_f = thgrl.build_features(graph, table, split, dcfg)
    detector = thgrl.train_ovr(train_f, split, aspects, dcfg)
    predictions = thgrl.predict(detector, test_f)
    report = thgrl.evaluate(test_f.reviews, predictions, split, aspects)
    assert 0.0 <= report.micro_f1 <= 1.0
    assert 0.0 <= report.macro_f1 <= 1.0


def test_pipeline_runs_and_is_deterministic(dataset, tmp_path):
    def run(out_dir):
        cfg = thgrl.RunConfig()
        cfg.vertices_file = dataset / "vertices.tsv"
        cfg.edges_file = dataset / "edges.tsv"
        cfg.reviews_file = dataset / "reviews.tsv"
        cfg.split_file = dataset / "split.tsv"
        cfg.aspects_file = dataset / "aspects.txt"
        cfg.out_dir = out_dir
        cfg.seed = 5
        cfg.walk.walks_per_vertex = 2
        cfg.walk.walk_length = 8
        cfg.tracer.tracer_count = 4
        cfg.tracer.gibbs_iterations = 25
        cfg.tracer.burn_in = 5
        cfg.embed.dimension = 16
        cfg.embed.context_window = 4
        cfg.embed.negatives = 3
        cfg.detect.epochs = 30
        return thgrl.run_pipeline(cfg)

    first = run(tmp_path / "a")
    second = run(tmp_path / "b")
    assert first.report.micro_f1 == second.report.micro_f1
    assert first.vertex_count == second.vertex_count
    assert (tmp_path / "a" / "report.txt").read_bytes() == \
        (tmp_path / "b" / "report.txt").read_bytes()
    summary = thgrl.load_report_summary(first.report_file)
    assert summary.micro_f1 == first.report.micro_f1


def test_stage_seed_distinct():
    seeds = {thgrl.stage_seed(1, s) for s in ("walk", "tracer", "embed", "detect")}
    assert len(seeds) == 4
