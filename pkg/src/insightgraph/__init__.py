"""insightgraph: declarative insights, objectives, and tasks.

The package turns the recurring structure of visual-analysis work into
executable objects: typed tables feed declarative transform pipelines
and trainable relationship models; their outcomes become analytic
knowledge nodes next to concept-backed domain knowledge; insights link
the two; objectives are insights with wildcards; tasks pair an objective
with the insights found while pursuing it. Complexity metrics (depth,
breadth) and a validation audit run over the resulting graph.
"""

from .errors import (
    DataError,
    DuplicateEdgeWarning,
    ExpressionError,
    GraphError,
    InsightGraphError,
    ModelError,
    PipelineError,
    SpecError,
    WildcardPresentError,
)
from .expr import eval_expression, format_expression, parse_expression
from .insight import (
    InsightNode,
    TaskNode,
    TaskStatus,
    WILDCARD,
    add_task_insight,
    complete,
    create_insight,
    create_task,
    is_fully_specified,
    match_with_wildcards,
    matching_insights,
    satisfies,
    task_status,
)
from .knowledge import (
    AnalyticKnowledgeNode,
    Concept,
    DomainKnowledgeNode,
    Instance,
    KnowledgeGraph,
    KnowledgeNode,
    add_related,
    add_source,
    add_target,
    create_analytic_node,
    create_concept,
    create_domain_node,
    create_instance,
    results,
)
from .metrics import MetricReport, Violation, breadth, depth, graph_stats, metric_report, validate
from .relationships import (
    DecisionTreeModel,
    EvaluationReport,
    IsolationForestModel,
    KernelDensityModel,
    KnnModel,
    LinearRegressionModel,
    NaiveBayesModel,
    NormalDistributionModel,
    RelationshipKind,
    RelationshipModel,
    evaluate,
    model_from_spec,
    model_to_spec,
    predict,
    score,
    train,
)
from .tabular import (
    Attribute,
    AttributeType,
    Table,
    cell_count,
    infer_schema,
    load_csv,
    table_from_json,
    table_to_json,
    write_csv,
)
from .transforms import (
    TransformSpec,
    execute_pipeline,
    referenced_attributes,
    spec_from_json,
    spec_to_json,
)

__version__ = "0.1.0"
