"""Run configuration: a flat, sectioned key-value file (INI syntax) whose
shipped defaults reproduce the reference setup with zero flags.

Sections and keys (all optional except the seed, which must come from the
file or from ``--seed``):

    [run]       seed, out
    [data]      input, retained, discarded      (feature names, comma list)
    [synthetic] bounds = xmin,ymin,xmax,ymax ; scatter = N ;
                blob1..blobN = cx,cy,sx,sy,count
    [labeling]  clusters, knn_k, score_multiplier, threshold_mode,
                threshold_value
    [mlp]       input, hidden, output
    [train]     max_epochs, patience, sigma0, lambda0, goal
    [ga]        cycles, population, alpha, mutation_rate, selection_rate,
                goal, fitness_metric, workers
    [split]     train, validation, test
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .data import BlobSpec, SplitRatios, SyntheticSpec, derive_seed
from .ga import GaConfig
from .labeling import LabelingConfig
from .mlp import Topology, TrainingConfig

__all__ = [
    "RunConfig",
    "load_config",
    "STREAM_SYNTH",
    "STREAM_LABEL",
    "STREAM_SPLIT",
    "STREAM_GA",
    "STREAM_NN",
]

# substream tags for deriving purpose-specific seeds from the run seed
STREAM_SYNTH = 0
STREAM_LABEL = 1
STREAM_SPLIT = 2
STREAM_GA = 3
STREAM_NN = 4

_DEFAULTS = """
[run]
out = out

[data]
input =
retained =
discarded =

[synthetic]
bounds = -20, -20, 120, 120
scatter = 20
blob1 = 35, 35, 5, 5, 44
blob2 = 48, 44, 7, 4, 38
blob3 = 60, 52, 4, 7, 30
blob4 = 70, 62, 6, 6, 33
blob5 = 82, 72, 3, 3, 30

[labeling]
clusters = 5
knn_k = 5
score_multiplier = 2.0
threshold_mode = mean
threshold_value =

[mlp]
input = 2
hidden = 10
output = 4

[train]
max_epochs = 200
patience = 6
sigma0 = 5e-5
lambda0 = 5e-7
goal = 0.0

[ga]
cycles = 20
population = 15
alpha = 0.3
mutation_rate = 0.1
selection_rate = 0.7
goal = 0.0
fitness_metric = overall
workers = 1

[split]
train = 0.70
validation = 0.15
test = 0.15
"""


@dataclass
class RunConfig:
    seed: int
    out: Path
    input: str | None
    retained: list
    discarded: list
    synthetic: SyntheticSpec
    labeling: LabelingConfig
    topology: Topology
    training: TrainingConfig
    ga: GaConfig
    ratios: SplitRatios
    quiet: bool = False


def _floats(raw: str):
    return [float(v.strip()) for v in raw.split(",") if v.strip()]


def _names(raw: str):
    return [v.strip() for v in raw.split(",") if v.strip()]


def _synthetic_spec(section) -> SyntheticSpec:
    bounds = _floats(section.get("bounds"))
    if len(bounds) != 4:
        raise ValueError("synthetic bounds need xmin,ymin,xmax,ymax")
    blobs = []
    for key in sorted(k for k in section if k.startswith("blob")):
        vals = _floats(section.get(key))
        if len(vals) != 5:
            raise ValueError(f"{key} needs cx,cy,sx,sy,count")
        blobs.append(BlobSpec((vals[0], vals[1]), (vals[2], vals[3]),
                              int(vals[4])))
    return SyntheticSpec(tuple(blobs), int(section.get("scatter")),
                         tuple(bounds))


def load_config(path=None, seed=None, out=None, quiet=False) -> RunConfig:
    """Merge the shipped defaults, an optional config file, and flag
    overrides into one validated RunConfig.  The seed is mandatory."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read_string(_DEFAULTS)
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        user = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        user.read(path, encoding="utf-8")
        # a user blob list replaces the default recipe instead of merging
        if user.has_section("synthetic") and any(
                k.startswith("blob") for k in user["synthetic"]):
            for key in [k for k in parser["synthetic"]
                        if k.startswith("blob")]:
                parser.remove_option("synthetic", key)
        parser.read(path, encoding="utf-8")

    run = parser["run"]
    if seed is None:
        raw = run.get("seed", "").strip()
        if not raw:
            raise ValueError(
                "a seed is required: set [run] seed in the config file or "
                "pass --seed"
            )
        seed = int(raw)
    out_dir = Path(out if out is not None else run.get("out"))

    data = parser["data"]
    lab = parser["labeling"]
    th_raw = lab.get("threshold_value", "").strip()
    labeling = LabelingConfig(
        num_clusters=lab.getint("clusters"),
        knn_k=lab.getint("knn_k"),
        pa_score_multiplier=lab.getfloat("score_multiplier"),
        seed=derive_seed(seed, STREAM_LABEL),
        threshold_mode=lab.get("threshold_mode"),
        threshold_value=float(th_raw) if th_raw else None,
    )
    net = parser["mlp"]
    topology = Topology(net.getint("input"), net.getint("hidden"),
                        net.getint("output"))
    tr = parser["train"]
    training = TrainingConfig(
        max_epochs=tr.getint("max_epochs"),
        patience=tr.getint("patience"),
        sigma0=tr.getfloat("sigma0"),
        lambda0=tr.getfloat("lambda0"),
        goal=tr.getfloat("goal"),
    )
    ga = parser["ga"]
    ga_cfg = GaConfig(
        cycles=ga.getint("cycles"),
        population_size=ga.getint("population"),
        crossover_alpha=ga.getfloat("alpha"),
        mutation_rate=ga.getfloat("mutation_rate"),
        selection_rate=ga.getfloat("selection_rate"),
        goal=ga.getfloat("goal"),
        seed=derive_seed(seed, STREAM_GA),
        fitness_metric=ga.get("fitness_metric"),
        workers=ga.getint("workers"),
    )
    split = parser["split"]
    ratios = SplitRatios(split.getfloat("train"),
                         split.getfloat("validation"),
                         split.getfloat("test"))

    return RunConfig(
        seed=seed,
        out=out_dir,
        input=data.get("input").strip() or None,
        retained=_names(data.get("retained")),
        discarded=_names(data.get("discarded")),
        synthetic=_synthetic_spec(parser["synthetic"]),
        labeling=labeling,
        topology=topology,
        training=training,
        ga=ga_cfg,
        ratios=ratios,
        quiet=quiet,
    )
