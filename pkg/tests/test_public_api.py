import pdial


def test_version():
    assert pdial.__version__


def test_core_names_exported():
    for name in (
        "EmbeddingBackendConfig",
        "LlmBackendConfig",
        "TrainConfig",
        "ProjectionModel",
        "PcaModel",
        "PerspectivePoint",
        "PromptSpec",
        "SearchTrace",
        "hashed_embed",
        "embed_batch",
        "generate_pairs",
        "train",
        "fit_pca",
        "pca_transform",
        "cluster_similarity_report",
        "brute_force_search",
        "gcd_search",
        "PdialError",
    ):
        assert hasattr(pdial, name), name
