"""semscape: embedding-landscape analytics for fine-grained text classifiers.

The engine ingests a classified corpus with model embeddings, projects it to
a deterministic 2-D landscape, extracts localized words and concepts,
computes confusion and label analytics, explains single predictions with
example-based contrastive graphs, and contrasts arbitrary sample groups.
Everything is exposed twice: as a Python API and, via the bundled service and
CLI, as JSON payloads consumed by the web frontend.
"""

from .compare import (
    DivergenceItem,
    GroupSelector,
    ResolvedGroup,
    divergence,
    dual_layout,
    item_counts,
    resolve_group,
)
from .dataset import (
    ConceptLexicon,
    Dataset,
    EmbeddingStore,
    ExternalImportance,
    Sample,
    derive_sample_embeddings,
    load_corpus,
    normalize_word,
    save_dataset,
)
from .errors import FormatError, InputError, NotFoundError, SemscapeError
from .explain import (
    ContrastTriple,
    ImportanceProfile,
    RelationGraph,
    Summary,
    relation_graph,
    select_contrast,
    similarity_contributions,
    summarize,
    vifi,
)
from .geometry import (
    RegionSelector,
    convex_hull,
    geometric_median,
    point_in_polygon,
    select_region,
)
from .labels import (
    ConfusionEntry,
    ErrorShares,
    LabelCluster,
    LabelPrototype,
    cluster_labels,
    confusion_table,
    error_shares,
    filter_samples,
    label_prototypes,
    sort_confusions,
)
from .localwords import (
    LocalWord,
    LocalWordCloud,
    LwcParams,
    OccurrenceIndex,
    build_index,
    local_concepts,
    local_words,
    locality_score,
)
from .projection import (
    LandscapeProjection,
    ProjectedLayout,
    ProjectionParams,
    kl_divergence,
    pairwise_affinities,
    project,
    tsne_gradient,
)

__version__ = "0.1.0"
