"""Embedding geometry analysis and zero-shot retrieval evaluation."""

from ._embedgeom import (
    EmbeddingMatrix,
    InputError,
    MetricReport,
    NumericalError,
    PcaModel,
    RelevanceSet,
    SessionLog,
    SignificanceResult,
    SweepCurve,
    __version__,
    evaluate_search,
    evaluate_sequential,
    fit_pca,
    load_embeddings,
    load_pca,
    load_relevance,
    load_sessions,
    ndcg_at_k,
    paired_significance,
    pca_from_spectrum,
    recall_at_k,
    run_cli,
    run_sweep,
    similarity,
    write_embeddings,
)

__all__ = [
    "EmbeddingMatrix",
    "InputError",
    "MetricReport",
    "NumericalError",
    "PcaModel",
    "RelevanceSet",
    "SessionLog",
    "SignificanceResult",
    "SweepCurve",
    "__version__",
    "evaluate_search",
    "evaluate_sequential",
    "fit_pca",
    "load_embeddings",
    "load_pca",
    "load_relevance",
    "load_sessions",
    "main",
    "ndcg_at_k",
    "paired_significance",
    "pca_from_spectrum",
    "recall_at_k",
    "run_cli",
    "run_sweep",
    "similarity",
    "write_embeddings",
]


def main(argv=None):
    """Console entry point mirroring the native `embedgeom` binary."""
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
