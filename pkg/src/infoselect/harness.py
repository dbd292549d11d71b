"""Experiment orchestration: configs, splits, score tables, CLI commands.

Every command is a pure function of its config and input files: given the
same bytes in, it writes the same bytes out. Randomness is routed through
per-stage offsets of the master seed so that, say, changing the number of
posterior samples cannot perturb the data split.
"""

from __future__ import annotations

import dataclasses
import json
import pathlib

import numpy as np

from .dataio import format_float, gen_synthetic, load_csv
from .errors import (
    ConfigError,
    InfoselectError,
    LengthMismatch,
    MissingLabels,
    PoolExhausted,
)
from .glm import CATEGORICAL, GAUSSIAN, Dataset, FitInfo, GlmModel, Head, map_fit
from .posterior import build_posterior
from .prediction import bald_mc_pool, draw_posterior_samples, epig_mc_pool, spearman
from .scores import (
    Scorer,
    egl_score,
    eig_pool_scores,
    epig_pool_scores,
    grand_score,
    jepig_pool_scores,
)
from .selection import (
    MAXIMIZE,
    MINIMIZE,
    SelectionResult,
    badge_kmeanspp,
    bait_forward_backward,
    greedy_logdet,
    top_k,
)
from .similarity import HARD, SAMPLED, build_data_matrix, eig_via_similarity

# Stage offsets added to the master seed. Each pipeline stage draws from
# its own stream, so enlarging one stage's consumption (more MC samples,
# more rounds) leaves every other stage's draws untouched.
DATA_SEED = 101
SPLIT_SEED = 137
SAMPLE_SEED = 211
SELECT_SEED = 307
LABEL_SEED = 401

# Score method id -> orientation. Maximize columns rank larger-is-better;
# the transductive proxies approximate a conditional entropy and rank
# smaller-is-better, so correlation and top-k negate them first.
SCORE_ORIENTATIONS: dict[str, str] = {
    "bald_pred": MAXIMIZE,
    "epig_pred": MAXIMIZE,
    "eig_logdet": MAXIMIZE,
    "eig_trace": MAXIMIZE,
    "epig_logdet": MINIMIZE,
    "epig_trace": MINIMIZE,
    "jepig_logdet": MINIMIZE,
    "jepig_trace": MINIMIZE,
    "eig_logdet_sim": MAXIMIZE,
    "egl": MAXIMIZE,
    "grand": MAXIMIZE,
}

DEFAULT_METHODS = (
    "bald_pred",
    "epig_pred",
    "eig_logdet",
    "eig_trace",
    "epig_logdet",
    "epig_trace",
    "jepig_logdet",
    "jepig_trace",
    "eig_logdet_sim",
)

GREEDY_OBJECTIVES = {
    "greedy_eig_logdet": "eig",
    "greedy_epig_logdet": "epig",
    "greedy_jepig_logdet": "jepig",
}

SELECT_METHODS = (
    tuple(GREEDY_OBJECTIVES)
    + ("bait", "badge", "random")
    + tuple(f"top_k_{name}" for name in SCORE_ORIENTATIONS)
)

EVAL_SOURCES = ("disjoint", "pool")

# JSON key -> attribute. Only "lambda" differs (Python keyword).
_FIELD_KEYS = {
    "seed": "seed",
    "head": "head",
    "classes": "classes",
    "dim": "dim",
    "n": "n",
    "class_sep": "class_sep",
    "lambda": "lam",
    "train_size": "train_size",
    "pool_size": "pool_size",
    "eval_size": "eval_size",
    "eval_source": "eval_source",
    "methods": "methods",
    "mc_samples": "mc_samples",
    "method": "method",
    "batch_size": "batch_size",
    "rounds": "rounds",
    "data": "data",
    "model": "model",
    "out": "out",
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description shared by all five commands.

    `data` / `model` are optional paths; without `data` a synthetic set is
    generated from the seed, without `model` the train split is fit
    in-process. `lam` serializes as "lambda".
    """

    seed: int = 0
    head: str = CATEGORICAL
    classes: int = 10
    dim: int = 16
    n: int = 2000
    class_sep: float = 2.0
    lam: float = 1.0
    train_size: int = 80
    pool_size: int = 1000
    eval_size: int = 200
    eval_source: str = "disjoint"
    methods: tuple[str, ...] = DEFAULT_METHODS
    mc_samples: int = 1000
    method: str = "greedy_eig_logdet"
    batch_size: int = 10
    rounds: int = 5
    data: str | None = None
    model: str | None = None
    out: str = "."

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a flat JSON object")
        kwargs = {}
        for key, value in raw.items():
            attr = _FIELD_KEYS.get(key)
            if attr is None:
                raise ConfigError(f"unknown config field {key!r}")
            if attr == "methods":
                if isinstance(value, str):
                    value = [v for v in value.split(",") if v]
                value = tuple(str(v) for v in value)
            kwargs[attr] = value
        config = cls(**kwargs)
        config.validate()
        return config

    def to_dict(self) -> dict:
        out = {}
        for key, attr in _FIELD_KEYS.items():
            value = getattr(self, attr)
            if attr == "methods":
                value = list(value)
            out[key] = value
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def validate(self):
        def require(cond: bool, message: str):
            if not cond:
                raise ConfigError(message)

        require(self.head in (CATEGORICAL, GAUSSIAN), f"unknown head {self.head!r}")
        require(self.classes >= 2, "classes must be >= 2")
        require(self.dim >= 1, "dim must be >= 1")
        require(self.n >= 1, "n must be >= 1")
        require(self.class_sep >= 0.0, "class_sep must be >= 0")
        require(self.lam >= 0.0, "lambda must be >= 0")
        require(self.train_size >= 1, "train_size must be >= 1")
        require(self.pool_size >= 0, "pool_size must be >= 0")
        require(self.eval_size >= 0, "eval_size must be >= 0")
        require(
            self.eval_source in EVAL_SOURCES,
            f"eval_source must be one of {EVAL_SOURCES}",
        )
        require(len(self.methods) > 0, "methods must be nonempty")
        for name in self.methods:
            require(
                name in SCORE_ORIENTATIONS,
                f"unknown score method {name!r}; known: {sorted(SCORE_ORIENTATIONS)}",
            )
        require(len(set(self.methods)) == len(self.methods), "duplicate method ids")
        require(self.mc_samples >= 2, "mc_samples must be >= 2")
        require(
            self.method in SELECT_METHODS,
            f"unknown selection method {self.method!r}",
        )
        require(self.batch_size >= 0, "batch_size must be >= 0")
        require(self.rounds >= 0, "rounds must be >= 0")


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Config file plus CLI overrides; overrides win field by field."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path}: invalid JSON ({e})") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path}: expected a flat JSON object")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(raw)


# ---------------------------------------------------------------------------
# splits


@dataclasses.dataclass(frozen=True)
class Splits:
    """Row ids of each split; test is whatever the others did not claim."""

    train: np.ndarray
    pool: np.ndarray
    eval: np.ndarray
    test: np.ndarray


def make_splits(config: ExperimentConfig, n_total: int) -> Splits:
    """Partition [0, n_total) by a permutation seeded off the master seed.

    eval_source="disjoint" carves the eval set after train and pool;
    eval_source="pool" reuses the first eval_size pool rows, which makes
    the transductive scores target the acquisition distribution itself.
    """
    t, p, e = config.train_size, config.pool_size, config.eval_size
    if config.eval_source == "pool" and e > p:
        raise ConfigError(f"eval_size {e} exceeds pool_size {p} with eval_source=pool")
    needed = t + p + (e if config.eval_source == "disjoint" else 0)
    if needed > n_total:
        raise ConfigError(f"splits need {needed} rows, dataset has {n_total}")
    perm = np.random.default_rng(config.seed + SPLIT_SEED).permutation(n_total)
    train = perm[:t]
    pool = perm[t : t + p]
    if config.eval_source == "disjoint":
        ev = perm[t + p : t + p + e]
        test = perm[t + p + e :]
    else:
        ev = pool[:e]
        test = perm[t + p :]
    return Splits(train=train, pool=pool, eval=ev, test=test)


# ---------------------------------------------------------------------------
# score tables


@dataclasses.dataclass
class ScoreTable:
    """Rectangular per-candidate scores, one column per method id.

    indices are dataset row ids of the scored pool. Orientation tags which
    direction is better so consumers can normalize before ranking.
    """

    indices: tuple[int, ...]
    columns: dict[str, np.ndarray]
    orientations: dict[str, str]

    def __post_init__(self):
        n = len(self.indices)
        for name, col in self.columns.items():
            if len(col) != n:
                raise LengthMismatch(
                    f"column {name!r} has {len(col)} entries for {n} rows"
                )
            if name not in self.orientations:
                raise ConfigError(f"column {name!r} has no orientation")

    @property
    def methods(self) -> tuple[str, ...]:
        return tuple(self.columns)

    def oriented(self, name: str) -> np.ndarray:
        """Column values flipped so that larger is always better."""
        col = np.asarray(self.columns[name], dtype=float)
        return -col if self.orientations[name] == MINIMIZE else col.copy()

    def to_csv(self, path):
        lines = ["index," + ",".join(self.methods)]
        cols = [np.asarray(self.columns[m], dtype=float) for m in self.methods]
        for row, idx in enumerate(self.indices):
            cells = [str(int(idx))] + [format_float(float(c[row])) for c in cols]
            lines.append(",".join(cells))
        pathlib.Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path) -> "ScoreTable":
        text = pathlib.Path(path).read_text(encoding="utf-8")
        lines = [ln for ln in text.splitlines() if ln]
        header = lines[0].split(",")
        if header[:1] != ["index"]:
            raise ConfigError(f"score table {path}: header must start with 'index'")
        names = header[1:]
        indices = []
        cols: list[list[float]] = [[] for _ in names]
        for ln in lines[1:]:
            cells = ln.split(",")
            indices.append(int(cells[0]))
            for j, cell in enumerate(cells[1:]):
                cols[j].append(float(cell))
        return cls(
            indices=tuple(indices),
            columns={n: np.asarray(c, dtype=float) for n, c in zip(names, cols)},
            orientations={n: SCORE_ORIENTATIONS.get(n, MAXIMIZE) for n in names},
        )

    def to_json(self, path):
        doc = {
            "indices": [int(i) for i in self.indices],
            "orientations": dict(self.orientations),
            "columns": {
                name: [float(v) for v in col] for name, col in self.columns.items()
            },
        }
        _write_json(path, doc)

    @classmethod
    def from_json(cls, path) -> "ScoreTable":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            indices=tuple(int(i) for i in doc["indices"]),
            columns={
                name: np.asarray(col, dtype=float)
                for name, col in doc["columns"].items()
            },
            orientations=dict(doc["orientations"]),
        )


def _write_json(path, doc):
    pathlib.Path(path).write_text(
        json.dumps(doc, indent=2) + "\n", encoding="utf-8"
    )


def _tagged(e: InfoselectError, where: str) -> InfoselectError:
    """Prefix the failing stage or method onto the error message."""
    e.args = (f"{where}: {e}",) + e.args[1:]
    return e


def compute_scores(
    methods,
    scorer: Scorer,
    pool_xs,
    eval_xs,
    *,
    mc_samples: int,
    seed: int,
    pool_labels=None,
) -> dict[str, np.ndarray]:
    """One score column per requested method id, in request order.

    Families sharing work are batched: the eval-Fisher term is built once
    per transductive family and the posterior is sampled once for both
    prediction-space methods. `grand` needs pool labels.
    """
    methods = tuple(methods)
    for name in methods:
        if name not in SCORE_ORIENTATIONS:
            raise ConfigError(f"unknown score method {name!r}")
    pool = np.atleast_2d(np.asarray(pool_xs, dtype=float))
    n_pool = pool.shape[0] if pool.size else 0
    if n_pool == 0:
        return {name: np.zeros(0) for name in methods}

    columns: dict[str, np.ndarray] = {}
    samples = None

    def posterior_samples():
        nonlocal samples
        if samples is None:
            samples = draw_posterior_samples(
                scorer.posterior, mc_samples, seed + SAMPLE_SEED
            )
        return samples

    pairs_cache: dict[str, list] = {}

    def family_pairs(family: str) -> list:
        if family not in pairs_cache:
            if family == "eig":
                pairs_cache[family] = eig_pool_scores(scorer, pool)
            elif family == "epig":
                pairs_cache[family] = epig_pool_scores(scorer, pool, eval_xs)
            else:
                pairs_cache[family] = jepig_pool_scores(scorer, pool, eval_xs)
        return pairs_cache[family]

    head = scorer.model.head
    for name in methods:
        try:
            if name == "bald_pred":
                col = bald_mc_pool(posterior_samples(), head, pool)
            elif name == "epig_pred":
                col = epig_mc_pool(posterior_samples(), head, pool, eval_xs)
            elif name in ("eig_logdet", "eig_trace", "epig_logdet", "epig_trace",
                          "jepig_logdet", "jepig_trace"):
                family, kind = name.rsplit("_", 1)
                pairs = family_pairs(family)
                col = np.asarray([getattr(p, kind) for p in pairs])
            elif name == "eig_logdet_sim":
                col = np.zeros(n_pool)
                for i in range(n_pool):
                    g = build_data_matrix(
                        scorer.model,
                        Dataset(pool[i : i + 1]),
                        SAMPLED,
                        seed=seed + LABEL_SEED + i,
                    )
                    col[i] = eig_via_similarity(g, scorer.posterior.precision)
            elif name == "egl":
                col = np.asarray([egl_score(scorer, x) for x in pool])
            elif name == "grand":
                if pool_labels is None:
                    raise MissingLabels("grand scores labeled data only")
                weights = posterior_samples().weights
                col = np.asarray(
                    [
                        grand_score(scorer, x, y, weights)
                        for x, y in zip(pool, pool_labels)
                    ]
                )
            else:  # pragma: no cover - guarded by the loop above
                raise ConfigError(f"unknown score method {name!r}")
        except InfoselectError as e:
            raise _tagged(e, f"method {name}")
        columns[name] = np.asarray(col, dtype=float)
    return columns


def build_score_table(
    config: ExperimentConfig, data: Dataset, splits: Splits, scorer: Scorer
) -> ScoreTable:
    pool_xs = data.features[splits.pool]
    eval_xs = data.features[splits.eval]
    pool_labels = data.labels[splits.pool] if data.is_labeled else None
    columns = compute_scores(
        config.methods,
        scorer,
        pool_xs,
        eval_xs,
        mc_samples=config.mc_samples,
        seed=config.seed,
        pool_labels=pool_labels,
    )
    return ScoreTable(
        indices=tuple(int(i) for i in splits.pool),
        columns=columns,
        orientations={m: SCORE_ORIENTATIONS[m] for m in config.methods},
    )


# ---------------------------------------------------------------------------
# model serialization


def save_model(path, model: GlmModel, lam: float, fit: FitInfo | None = None):
    doc = {
        "head": {"kind": model.head.kind, "C": model.head.num_outputs},
        "D": model.dim,
        "weights": [float(v) for v in model.weights.reshape(-1)],
        "lambda": float(lam),
        "fit": {
            "grad_norm": float(fit.grad_norm) if fit else None,
            "iters": int(fit.iterations) if fit else None,
        },
    }
    _write_json(path, doc)


def load_model(path) -> tuple[GlmModel, float]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        kind = doc["head"]["kind"]
        c = int(doc["head"]["C"])
        dim = int(doc["D"])
        flat = np.asarray(doc["weights"], dtype=float)
        lam = float(doc["lambda"])
    except (KeyError, TypeError) as e:
        raise ConfigError(f"model {path}: missing field ({e})") from e
    if kind == CATEGORICAL:
        head = Head.categorical(c)
    elif kind == GAUSSIAN:
        head = Head.gaussian()
    else:
        raise ConfigError(f"model {path}: unknown head kind {kind!r}")
    if flat.size != dim * head.num_outputs:
        raise ConfigError(
            f"model {path}: {flat.size} weights for D={dim}, C={head.num_outputs}"
        )
    weights = flat.reshape(dim, head.num_outputs)
    return GlmModel(head=head, weights=weights), lam


# ---------------------------------------------------------------------------
# shared command plumbing


def _head_for(config: ExperimentConfig) -> Head:
    if config.head == GAUSSIAN:
        return Head.gaussian()
    return Head.categorical(config.classes)


def load_dataset(config: ExperimentConfig) -> Dataset:
    if config.data is not None:
        return load_csv(config.data)
    return gen_synthetic(
        config.seed + DATA_SEED, config.n, config.dim, config.classes, config.class_sep
    )


def _fit(config: ExperimentConfig, train: Dataset) -> tuple[GlmModel, FitInfo]:
    try:
        return map_fit(train, _head_for(config), config.lam, full_output=True)
    except InfoselectError as e:
        raise _tagged(e, "fit")


def _resolve_model(config: ExperimentConfig, train: Dataset) -> GlmModel:
    """Load the model artifact when given, else fit the train split."""
    if config.model is not None:
        model, lam = load_model(config.model)
        if lam != config.lam:
            raise ConfigError(
                f"model {config.model} was fit with lambda={lam}, "
                f"config says {config.lam}"
            )
        if model.dim != train.dim:
            raise ConfigError(
                f"model expects D={model.dim}, data has D={train.dim}"
            )
        return model
    model, _ = _fit(config, train)
    return model


def _scorer_for(config: ExperimentConfig, data: Dataset, splits: Splits) -> Scorer:
    train = data.subset(splits.train)
    model = _resolve_model(config, train)
    posterior = build_posterior(model, train, config.lam)
    return Scorer(model, posterior)


def _out_dir(config: ExperimentConfig) -> pathlib.Path:
    out = pathlib.Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_train(config: ExperimentConfig) -> pathlib.Path:
    """Fit the train split and write model.json."""
    config.validate()
    data = load_dataset(config)
    splits = make_splits(config, data.n)
    model, info = _fit(config, data.subset(splits.train))
    path = _out_dir(config) / "model.json"
    save_model(path, model, config.lam, info)
    return path


def cmd_score(config: ExperimentConfig) -> tuple[pathlib.Path, pathlib.Path]:
    """Score the pool with every configured method; write CSV and JSON."""
    config.validate()
    data = load_dataset(config)
    splits = make_splits(config, data.n)
    scorer = _scorer_for(config, data, splits)
    table = build_score_table(config, data, splits, scorer)
    out = _out_dir(config)
    csv_path, json_path = out / "scores.csv", out / "scores.json"
    table.to_csv(csv_path)
    table.to_json(json_path)
    return csv_path, json_path


def select_batch(
    config: ExperimentConfig,
    scorer: Scorer,
    pool_xs: np.ndarray,
    eval_xs: np.ndarray,
    k: int,
    seed: int,
    pool_labels=None,
) -> SelectionResult:
    """Dispatch config.method over the pool; indices are pool positions."""
    method = config.method
    try:
        if method in GREEDY_OBJECTIVES:
            objective = GREEDY_OBJECTIVES[method]
            ev = eval_xs if objective != "eig" else None
            return greedy_logdet(scorer, pool_xs, k, objective=objective, eval_xs=ev)
        if method == "bait":
            return bait_forward_backward(scorer, pool_xs, k, eval_xs)
        if method == "badge":
            g = build_data_matrix(scorer.model, Dataset(pool_xs), HARD)
            return badge_kmeanspp(g, k, seed=seed)
        if method == "random":
            rng = np.random.default_rng(seed)
            picked = rng.choice(pool_xs.shape[0], size=k, replace=False)
            return SelectionResult(
                indices=tuple(int(i) for i in picked),
                objective_value=0.0,
                method="random",
                gains=tuple(0.0 for _ in range(k)),
            )
        if method.startswith("top_k_"):
            score_name = method[len("top_k_") :]
            col = compute_scores(
                (score_name,),
                scorer,
                pool_xs,
                eval_xs,
                mc_samples=config.mc_samples,
                seed=config.seed,
                pool_labels=pool_labels,
            )[score_name]
            if SCORE_ORIENTATIONS[score_name] == MINIMIZE:
                col = -col
            return top_k(col, k)
    except InfoselectError as e:
        raise _tagged(e, f"select {method}")
    raise ConfigError(f"unknown selection method {method!r}")


def cmd_select(config: ExperimentConfig) -> pathlib.Path:
    """Choose a batch from the pool and write select.json (row ids)."""
    config.validate()
    data = load_dataset(config)
    splits = make_splits(config, data.n)
    scorer = _scorer_for(config, data, splits)
    pool_labels = data.labels[splits.pool] if data.is_labeled else None
    result = select_batch(
        config,
        scorer,
        data.features[splits.pool],
        data.features[splits.eval],
        config.batch_size,
        seed=config.seed + SELECT_SEED,
        pool_labels=pool_labels,
    )
    doc = {
        "method": result.method,
        "k": config.batch_size,
        "indices": [int(splits.pool[i]) for i in result.indices],
        "pool_positions": [int(i) for i in result.indices],
        "objective": float(result.objective_value),
        "gains": [float(g) for g in result.gains],
    }
    path = _out_dir(config) / "select.json"
    _write_json(path, doc)
    return path


def correlation_matrix(table: ScoreTable) -> tuple[tuple[str, ...], np.ndarray]:
    """Spearman matrix over orientation-normalized columns.

    The diagonal is pinned to 1.0 and the lower triangle mirrors the upper
    one, so the output is exactly symmetric.
    """
    names = table.methods
    oriented = [table.oriented(m) for m in names]
    m = len(names)
    mat = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            try:
                rho = spearman(oriented[i], oriented[j])
            except InfoselectError as e:
                raise _tagged(e, f"correlate {names[i]} vs {names[j]}")
            mat[i, j] = mat[j, i] = rho
    return names, mat


def cmd_correlate(config: ExperimentConfig) -> tuple[pathlib.Path, pathlib.Path]:
    """Score the pool, then write the method-by-method Spearman matrix."""
    config.validate()
    data = load_dataset(config)
    splits = make_splits(config, data.n)
    scorer = _scorer_for(config, data, splits)
    table = build_score_table(config, data, splits, scorer)
    out = _out_dir(config)
    table.to_csv(out / "scores.csv")
    table.to_json(out / "scores.json")

    names, mat = correlation_matrix(table)
    lines = ["method," + ",".join(names)]
    for i, name in enumerate(names):
        lines.append(name + "," + ",".join(format_float(v) for v in mat[i]))
    csv_path = out / "correlation.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    json_path = out / "correlation.json"
    _write_json(
        json_path,
        {"methods": list(names), "matrix": [[float(v) for v in row] for row in mat]},
    )
    return csv_path, json_path


def _accuracy(model: GlmModel, data: Dataset, row_ids: np.ndarray) -> float:
    xs = data.features[row_ids]
    ys = data.require_labels()[row_ids]
    zs = xs @ model.weights
    return float(np.mean(np.argmax(zs, axis=1) == ys))


def cmd_simulate(config: ExperimentConfig) -> pathlib.Path:
    """Run the label-and-refit loop and write per-round learning curves.

    Each round selects batch_size pool rows with config.method, reveals
    their labels, refits, and scores accuracy on the held-out test split.
    A random-selection baseline over the same splits is always included.
    """
    config.validate()
    if config.head != CATEGORICAL:
        raise ConfigError("simulate reports accuracy; use the categorical head")
    data = load_dataset(config)
    if not data.is_labeled:
        raise MissingLabels("simulate needs labels to reveal")
    splits = make_splits(config, data.n)
    if splits.test.size == 0:
        raise ConfigError("no held-out rows left for accuracy; shrink the splits")

    methods = [config.method]
    if "random" not in methods:
        methods.append("random")

    rows = []
    for method in methods:
        run_config = config.replace(method=method)
        train_ids = [int(i) for i in splits.train]
        pool_ids = [int(i) for i in splits.pool]
        model, _ = _fit(run_config, data.subset(train_ids))
        rows.append((method, 0, len(train_ids), _accuracy(model, data, splits.test), 0.0))
        for rnd in range(1, config.rounds + 1):
            if config.batch_size > len(pool_ids):
                raise PoolExhausted(
                    f"round {rnd} needs {config.batch_size} rows, "
                    f"pool has {len(pool_ids)}"
                )
            train_data = data.subset(train_ids)
            posterior = build_posterior(model, train_data, config.lam)
            scorer = Scorer(model, posterior)
            result = select_batch(
                run_config,
                scorer,
                data.features[np.asarray(pool_ids, dtype=int)],
                data.features[splits.eval],
                config.batch_size,
                seed=config.seed + SELECT_SEED + rnd,
                pool_labels=data.require_labels()[np.asarray(pool_ids, dtype=int)],
            )
            picked = [pool_ids[i] for i in result.indices]
            train_ids.extend(picked)
            taken = set(picked)
            pool_ids = [i for i in pool_ids if i not in taken]
            model, _ = _fit(run_config, data.subset(train_ids))
            rows.append(
                (
                    method,
                    rnd,
                    len(train_ids),
                    _accuracy(model, data, splits.test),
                    float(result.objective_value),
                )
            )

    lines = ["method,round,labeled_count,accuracy,objective"]
    for method, rnd, count, acc, obj in rows:
        lines.append(
            f"{method},{rnd},{count},{format_float(acc)},{format_float(obj)}"
        )
    path = _out_dir(config) / "simulate.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
