"""Static cost analysis for infrastructure-from-code programs.

Parse a program, extract its cost graph, bind a vendor catalog, and
estimate (or simulate) what a month of running it costs, in integer
micro-USD.
"""

from .annotations import Annotation, read_annotations, strip_annotations, write_annotation
from .assumptions import Assumption, AssumptionSet, assemble
from .errors import PennyError
from .estimator import (
    CostReport,
    FactorCost,
    SECONDS_PER_MONTH,
    compare_catalogs,
    invocation_cost,
    monthly_cost,
    monthly_counts,
    stock_at,
)
from .extract import analyze, analyze_source, build_graph, entry_points, find_resources, resolve_usages
from .graph import CostFactor, CostGraph, CostNode, Diamond, FlowEdge, factor_catalogue, validate
from .money import display_usd, round_half_even
from .parser import parse
from .pricing import Catalog, bind, evaluate_rule, load_catalog, marginal_rate, parse_catalog
from .simulate import compile_program, simulate_month
from .source import SourceFile, Span
from .syntax import Phase, SyntaxNode, SyntaxTree, phase_of

__version__ = "0.1.0"
