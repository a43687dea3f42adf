"""Reading-log knowledge analytics.

Reconstructs learning sessions from activity event logs, topic-models
each session's text, allocates content shares to knowledge points, and
computes time-decayed familiarity measures with analytics on top
(concept pools, common topics, concentrations, referee matching,
discipline expertise).
"""

from .analytics import (
    ConceptsPool,
    ConcentrationReport,
    RefereeMatch,
    common_topics,
    discipline_expertise,
    lecture_comprehension,
    match_referees,
    pool_group,
    pool_idf,
    pool_person,
    pool_tf,
    research_concentrations,
)
from .config import PipelineConfig
from .errors import (
    ConfigError,
    EventLogError,
    KmodelError,
    MathDomainError,
    NotFoundError,
    OrderingError,
    StoreError,
    TreeError,
)
from .events import (
    ActivityEvent,
    LearningSession,
    PageView,
    discriminate_sessions,
    filter_sessions,
    merge_sessions,
    parse_event_log,
    read_event_log,
)
from .familiarity import (
    DEFAULT_RETENTION,
    FamiliarityScore,
    LogisticParams,
    NormalizationConfig,
    RetentionLike,
    RetentionParams,
    familiarity,
    familiarity_by_point,
    fit_logistic,
    normalize,
    relative_familiarity,
    retention,
    standardize,
    topic_familiarity,
    understanding_logit,
    understanding_probability,
)
from .history import (
    HistoryStore,
    LearningHistory,
    LearningRecord,
    append_record,
    history_window,
)
from .lda import TopicModelResult, fit_lda, gibbs_backend
from .pipeline import IngestReport, PageTextSource, ingest
from .shares import ShareAllocation, knowledge_point_shares
from .textprep import (
    TokenizedContent,
    default_stopwords,
    load_word_list,
    merge_multiword_terms,
    normalize_name,
    tokenize,
)
from .tree import KnowledgeNode, KnowledgeTree, load_tree

__version__ = "0.1.0"
