"""Decision trees turned into argumentation graphs that classify like the tree."""

from .adg import Adg, AdgArgument, check_well_formed, extract_adg, simplify_adg
from .af import Framework, Label, Labelling, grounded_labelling
from .dataset import Dataset, DatasetError, Recipe, load_csv, load_dataset, split
from .dtree import DecisionTree, Predicate, fit
from .extended import (
    DnfSupport,
    PipelineConfig,
    XArgument,
    Xadg,
    apply_m1,
    apply_m2,
    apply_m3,
    build_xadg,
    lift,
    normalize,
    normalize_well_built,
    support_stats,
)
from .inference import classify, equivalence_report, predict_codes

__version__ = "0.1.0"
