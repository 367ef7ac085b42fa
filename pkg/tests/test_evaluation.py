import numpy as np
import pytest

from pdial.embedding import EmbeddingBackendConfig, hashed_embed
from pdial.errors import InputValidationError
from pdial.evaluation import cluster_similarity_report, render_report_text
from pdial.metric import LabeledDocument, ProjectionModel, TrainConfig, train

from conftest import FIXTURE_BACKEND

BACKEND8 = EmbeddingBackendConfig(kind="hashed", dimension=8)


def _identity(dim):
    return ProjectionModel(d_in=dim, d_out=dim, W=np.eye(dim))


class TestReportBasics:
    def test_identical_single_docs_give_unit_cell(self):
        train_docs = [LabeledDocument("t1", "hello there", "a"),
                      LabeledDocument("t2", "completely different words", "b")]
        test_docs = [LabeledDocument("s1", "hello there", "a"),
                     LabeledDocument("s2", "completely different words", "b")]
        report = cluster_similarity_report(
            train_docs, test_docs, _identity(8), BACKEND8
        )
        i = report.clusters.index("a")
        assert report.pre_mean[i, i] == pytest.approx(1.0, abs=1e-12)
        assert report.pre_std[i, i] == pytest.approx(0.0, abs=1e-12)

    def test_three_clusters_give_3x3(self, fixture_train_docs, fixture_test_docs):
        report = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, _identity(64), FIXTURE_BACKEND
        )
        assert len(report.clusters) == 3
        assert report.pre_mean.shape == (3, 3)
        assert report.post_std.shape == (3, 3)

    def test_cluster_order_follows_train_split(self, fixture_train_docs, fixture_test_docs):
        report = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, _identity(64), FIXTURE_BACKEND
        )
        assert list(report.clusters) == ["pro-madrid", "neutral", "pro-barca"]

    def test_unknown_test_cluster_rejected(self, fixture_train_docs):
        rogue = [LabeledDocument("x", "some text", "pro-atletico")]
        with pytest.raises(InputValidationError):
            cluster_similarity_report(
                fixture_train_docs, rogue, _identity(64), FIXTURE_BACKEND
            )

    def test_missing_test_cluster_rejected(self, fixture_train_docs, fixture_test_docs):
        partial = [d for d in fixture_test_docs if d.cluster != "neutral"]
        with pytest.raises(InputValidationError):
            cluster_similarity_report(
                fixture_train_docs, partial, _identity(64), FIXTURE_BACKEND
            )


class TestReportValues:
    def test_matches_independent_recomputation(
        self, fixture_train_docs, fixture_test_docs, fixture_model
    ):
        report = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, fixture_model, FIXTURE_BACKEND
        )

        # plain recomputation from scratch: own cosine, own grouping
        def cos(u, v):
            return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))

        W = fixture_model.W
        for i, tc in enumerate(report.clusters):
            for j, rc in enumerate(report.clusters):
                pre_sims, post_sims = [], []
                for td in fixture_test_docs:
                    if td.cluster != tc:
                        continue
                    for rd in fixture_train_docs:
                        if rd.cluster != rc:
                            continue
                        e_t = hashed_embed(td.text, 64)
                        e_r = hashed_embed(rd.text, 64)
                        pre_sims.append(cos(e_t, e_r))
                        post_sims.append(cos(W @ e_t, W @ e_r))
                assert report.pre_mean[i, j] == pytest.approx(
                    np.mean(pre_sims), abs=1e-9
                )
                assert report.pre_std[i, j] == pytest.approx(
                    np.std(pre_sims), abs=1e-9
                )
                assert report.post_mean[i, j] == pytest.approx(
                    np.mean(post_sims), abs=1e-9
                )
                assert report.post_std[i, j] == pytest.approx(
                    np.std(post_sims), abs=1e-9
                )

    def test_pre_values_independent_of_training(
        self, fixture_train_docs, fixture_test_docs, fixture_matrix, fixture_model
    ):
        trained = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, fixture_model, FIXTURE_BACKEND
        )
        other_model, _ = train(
            fixture_train_docs,
            fixture_matrix,
            FIXTURE_BACKEND,
            TrainConfig(loss_kind="cosine", epochs=2, seed=99),
        )
        other = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, other_model, FIXTURE_BACKEND
        )
        np.testing.assert_array_equal(trained.pre_mean, other.pre_mean)
        np.testing.assert_array_equal(trained.pre_std, other.pre_std)

    def test_document_order_invariance(
        self, fixture_train_docs, fixture_test_docs, fixture_model
    ):
        base = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, fixture_model, FIXTURE_BACKEND
        )
        rng = np.random.default_rng(5)
        shuffled_test = [fixture_test_docs[k] for k in rng.permutation(6)]
        again = cluster_similarity_report(
            fixture_train_docs, shuffled_test, fixture_model, FIXTURE_BACKEND
        )
        np.testing.assert_allclose(base.pre_mean, again.pre_mean, atol=1e-12)
        np.testing.assert_allclose(base.post_std, again.post_std, atol=1e-12)

    def test_post_diagonal_dominates_rows(
        self, fixture_train_docs, fixture_test_docs, fixture_model
    ):
        report = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, fixture_model, FIXTURE_BACKEND
        )
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert report.post_mean[i, i] > report.post_mean[i, j]


class TestReportRendering:
    def test_cells_formatted_mean_paren_std(
        self, fixture_train_docs, fixture_test_docs, fixture_model
    ):
        report = cluster_similarity_report(
            fixture_train_docs, fixture_test_docs, fixture_model, FIXTURE_BACKEND
        )
        text = render_report_text(report)
        assert "Test: pro-madrid" in text
        expected_cell = (
            f"{report.pre_mean[0, 0]:.2f} ({report.pre_std[0, 0]:.2f})"
        )
        assert expected_cell in text
        assert "std: population" in text
