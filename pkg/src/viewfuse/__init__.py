"""viewfuse: kernel-based multi-view similarity, fusion, and
comprehension tasks (modularization, link recommendation, cross-modal
search) for software systems."""

from .clustering import Dendrogram, agglomerate, pd_metric
from .errors import (
    EmptyIntersectionError,
    EmptyQueryError,
    EmptyViewError,
    InsufficientDataError,
    ParseError,
    ViewfuseError,
)
from .fusion import (
    CcaModel,
    SpectralEmbedding,
    cca,
    cotrain,
    embedding_similarity,
    kcca,
    mkl_add,
    subspace_similarity,
)
from .ingest import (
    CallGraph,
    Corpus,
    TransactionLog,
    UnitIndex,
    build_corpus,
    build_package_tree,
    build_tfidf,
    intersect_views,
    load_call_graph,
    load_transactions,
    lsi_project,
    preprocess_corpus,
)
from .kernels import (
    DistanceMatrix,
    KernelMatrix,
    bow_kernel,
    center_kernel,
    exp_diffusion,
    kernel_to_distance,
    laplacian_diffusion,
    normalize_kernel,
    poly_kernel,
    rbf_kernel,
    view_grid,
)
from .recommend import (
    EvalReport,
    ItemMatrix,
    TopicModel,
    binarize_topics,
    knn_predict,
    max_f1,
    nested_cv,
    nmf_topics,
    pr_auc,
    predict_all,
    recommend_links,
)
from .retrieval import (
    RetrievalModel,
    embed_query_text,
    fit_retrieval,
    nearest,
    query_subspace,
)
from .string_kernels import StringKernelConfig, string_kernel, string_kernel_value
from .trees import TreeNode, parse_newick, to_newick
from .workspace import Workspace

__version__ = "0.1.0"
