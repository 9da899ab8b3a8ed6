"""Command-line interface: JSON config in, deterministic JSON/CSV report out.

Exit codes: 0 success, 2 config or validation error, 3 numeric
non-convergence (a partial report is still emitted). Errors go to stderr as
one-line JSON objects.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from . import analysis, optimizer
from .builder import build_inequality, mixed_state_bound
from .errors import ConfigError, NetbellError, NonConvergenceError
from .evaluator import MeasurementStrategy, input_counts_for
from .fcbi import CHAINED, CHSH, EBI, custom_matrix, make_catalog
from .optimizer import LocalModel
from .qstate import (
    WernerSpec,
    bloch_decompose,
    classical_zz,
    max_entangled,
    product_00,
    pure_schmidt,
    werner,
)
from .topology import build_topology, find_leaves

_TOP_KEYS = {"network", "inequality", "states", "strategy", "options", "host_network"}
_OPTION_KEYS = {"seed", "restarts", "budget", "tol", "mode"}


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigError(f"config is missing the required section {key!r}")
    return config[key]


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(config) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    options = config.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("options must be an object")
    bad = set(options) - _OPTION_KEYS
    if bad:
        raise ConfigError(f"unknown option keys: {sorted(bad)}")
    return config


def _parse_topology(section) -> "NetworkTopology":
    if not isinstance(section, dict) or set(section) != {"parties", "sources"}:
        raise ConfigError("network section needs exactly {parties, sources}")
    try:
        return build_topology(int(section["parties"]), section["sources"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad network section: {exc}") from exc


def _parse_fcbi(spec):
    if spec == "chsh":
        return make_catalog(CHSH)
    if spec == "ebi":
        return make_catalog(EBI)
    if isinstance(spec, dict) and set(spec) == {"chained"}:
        return make_catalog(CHAINED, int(spec["chained"]))
    if isinstance(spec, dict) and set(spec) == {"custom"}:
        return custom_matrix(spec["custom"])
    raise ConfigError(f"unrecognized fcbi spec {spec!r}")


def _parse_inequality(config: dict, topology):
    section = _require(config, "inequality")
    if not isinstance(section, dict) or set(section) != {"k", "fcbi"}:
        raise ConfigError("inequality section needs exactly {k, fcbi}")
    fcbi_map = {
        int(source): _parse_fcbi(spec) for source, spec in section["fcbi"].items()
    }
    return build_inequality(topology, int(section["k"]), fcbi_map)


def _complex_entry(value):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(value[0], value[1])
    raise ConfigError(f"matrix entries must be numbers or [re, im], got {value!r}")


def _parse_state(spec):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"state spec must be an object with a type: {spec!r}")
    kind = spec["type"]
    if kind == "max_entangled":
        return max_entangled()
    if kind == "werner":
        return werner(
            WernerSpec(
                v=float(spec.get("v", 1.0)),
                schmidt_a=float(spec.get("schmidt_a", 1.0 / np.sqrt(2.0))),
            )
        )
    if kind == "pure":
        return pure_schmidt(float(spec.get("schmidt_a", 1.0 / np.sqrt(2.0))))
    if kind == "classical_zz":
        return classical_zz()
    if kind == "product_00":
        return product_00()
    if kind == "matrix":
        rows = spec.get("matrix")
        matrix = np.array([[_complex_entry(v) for v in row] for row in rows])
        return bloch_decompose(matrix)
    raise ConfigError(f"unknown state type {kind!r}")


def _parse_states(config: dict, topology) -> dict:
    section = _require(config, "states")
    states = {int(s): _parse_state(spec) for s, spec in section.items()}
    missing = set(range(1, topology.n_sources + 1)) - set(states)
    if missing:
        raise ConfigError(f"states missing for sources {sorted(missing)}")
    return states


def _parse_strategy(config: dict):
    section = config.get("strategy", "auto")
    if section == "auto":
        return "auto"
    if not isinstance(section, dict):
        raise ConfigError("strategy must be 'auto' or a nested object")
    strategy = MeasurementStrategy()
    try:
        for party, inputs in section.items():
            for inp, sources in inputs.items():
                for source, vec in sources.items():
                    strategy.set(int(party), int(inp), int(source), vec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad strategy entry: {exc}") from exc
    return strategy


def _options(config: dict, args) -> dict:
    opts = {"seed": 0, "restarts": 32, "budget": 10_000, "tol": 1e-9,
            "mode": "exhaustive"}
    opts.update(config.get("options", {}))
    for name in _OPTION_KEYS:
        value = getattr(args, name, None)
        if value is not None:
            opts[name] = value
    opts["seed"] = int(opts["seed"])
    opts["restarts"] = int(opts["restarts"])
    opts["budget"] = int(opts["budget"])
    opts["tol"] = float(opts["tol"])
    return opts


def _sig(x):
    return analysis.format_sig(float(x))


def _strategy_dict(strategy: MeasurementStrategy) -> dict:
    out: dict = {}
    for (party, inp, source) in sorted(strategy.slots):
        vec = strategy.slots[(party, inp, source)].n
        out.setdefault(str(party), {}).setdefault(str(inp), {})[str(source)] = [
            _sig(c) for c in vec
        ]
    return out


def _model_dict(model: LocalModel) -> dict:
    return {
        "cardinalities": {str(s): c for s, c in sorted(model.cardinalities.items())},
        "weights": {
            str(s): [_sig(w) for w in model.weights[s]]
            for s in sorted(model.weights)
        },
        "responses": {
            str(p): np.asarray(model.responses[p]).astype(int).tolist()
            for p in sorted(model.responses)
        },
    }


def _search_dict(rep: optimizer.SearchReport) -> dict:
    if isinstance(rep.best_config, MeasurementStrategy):
        config = {"strategy": _strategy_dict(rep.best_config)}
    elif isinstance(rep.best_config, LocalModel):
        config = {"local_model": _model_dict(rep.best_config)}
    else:
        config = {}
    out = {
        "best_value": _sig(rep.best_value),
        "restarts_used": rep.restarts_used,
        "seed": rep.seed,
        "converged": rep.converged,
        **config,
    }
    for key, value in rep.extra.items():
        out[key] = _sig(value) if isinstance(value, float) else value
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    leaves = find_leaves(topology)
    return {
        "n_parties": topology.n_parties,
        "n_sources": topology.n_sources,
        "l": leaves.l,
        "leaf_set": [int(p) for p in leaves.leaf_set],
        "intermediate_set": [int(p) for p in leaves.intermediate_set],
        "peripheral_map": {str(p): int(s) for p, s in leaves.peripheral_map.items()},
    }


def cmd_build(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    ineq = _parse_inequality(config, topology)
    return {
        "l": ineq.l,
        "k": ineq.k,
        "classical_bound": _sig(ineq.classical_bound),
        "quantum_bound": _sig(ineq.quantum_bound),
        "fcbi": {
            str(s): {"tag": m.tag, "rows": m.rows,
                     "classical_bound": _sig(m.classical_bound),
                     "quantum_opt": _sig(m.quantum_opt)}
            for s, m in sorted(ineq.fcbi_map.items())
        },
    }


def cmd_eval(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    ineq = _parse_inequality(config, topology)
    states = _parse_states(config, topology)
    strategy = _parse_strategy(config)
    rep = analysis.report(
        ineq, states, strategy,
        seed=opts["seed"], restarts=opts["restarts"], tol=opts["tol"],
    )
    return rep.to_dict()


def cmd_bounds(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    ineq = _parse_inequality(config, topology)
    states = _parse_states(config, topology)
    mixed = mixed_state_bound(ineq, states, restarts=opts["restarts"],
                              seed=opts["seed"])
    return {
        "classical": _sig(ineq.classical_bound),
        "quantum": _sig(ineq.quantum_bound),
        "mixed": _sig(mixed),
    }


def cmd_oracle(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    ineq = _parse_inequality(config, topology)
    rep = optimizer.classical_oracle(
        ineq, mode=opts["mode"], budget=opts["budget"], seed=opts["seed"]
    )
    out = _search_dict(rep)
    out["classical_bound"] = _sig(ineq.classical_bound)
    return out


def cmd_optimize(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    ineq = _parse_inequality(config, topology)
    states = _parse_states(config, topology)
    rep = optimizer.seesaw_network(
        ineq, states, restarts=opts["restarts"], seed=opts["seed"]
    )
    out = _search_dict(rep)
    out["quantum_bound"] = _sig(ineq.quantum_bound)
    return out


def _visibility_payload(ineq) -> dict:
    m = ineq.topology.n_sources
    threshold = analysis.critical_visibility_uniform(ineq)
    product = analysis.werner_violation_threshold(ineq)
    return {
        "per_source_threshold": _sig(threshold),
        "product_threshold": _sig(product),
        "l": ineq.l,
        "m": m,
        "sensitivity": {
            "note": (
                "the per-source threshold depends strongly on the source "
                "count; the value recomputed with one extra source is given "
                "for comparison"
            ),
            "per_source_threshold_m_plus_1": _sig(
                optimizer.uniform_visibility_threshold(ineq.l, m + 1)
            )
            if all(f.tag == CHSH for f in ineq.fcbi_map.values())
            else None,
        },
    }


def cmd_visibility(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    ineq = _parse_inequality(config, topology)
    payload = _visibility_payload(ineq)
    if args.format == "csv":
        rows = []
        for v in np.linspace(0.0, 1.0, 101):
            states = {
                s: werner(WernerSpec(float(v)))
                for s in range(1, topology.n_sources + 1)
            }
            bound = mixed_state_bound(ineq, states, restarts=opts["restarts"],
                                      seed=opts["seed"])
            rows.append((v, bound, ineq.classical_bound))
        payload["sweep"] = rows
    return payload


def cmd_discriminate(config, args, opts):
    topology = _parse_topology(_require(config, "network"))
    host = _parse_topology(_require(config, "host_network"))
    ineq = _parse_inequality(config, topology)
    states = {}
    if "states" in config:
        section = config["states"]
        states = {int(s): _parse_state(spec) for s, spec in section.items()}
    for s in range(1, host.n_sources + 1):
        states.setdefault(s, max_entangled())
    rep = optimizer.discriminate(
        ineq, host, states,
        restarts=opts["restarts"], seed=opts["seed"], tol=opts["tol"],
    )
    out = _search_dict(rep)
    window = optimizer.visibility_window(topology, host)
    out["window"] = {
        "a": {k: _sig(v) if isinstance(v, float) else v
              for k, v in window["a"].items()},
        "b": {k: _sig(v) if isinstance(v, float) else v
              for k, v in window["b"].items()},
        "bounds": [_sig(window["window"][0]), _sig(window["window"][1])],
        "sensitivity": {
            "note": (
                "window endpoints recomputed with one extra source per "
                "network, for comparison; the endpoints are sensitive to "
                "the source count"
            ),
            "bounds_m_plus_1": sorted(
                _sig(optimizer.uniform_visibility_threshold(
                    window[name]["l"], window[name]["m"] + 1))
                for name in ("a", "b")
            ),
        },
    }
    return out


_COMMANDS = {
    "analyze": cmd_analyze,
    "build": cmd_build,
    "eval": cmd_eval,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
    "optimize": cmd_optimize,
    "visibility": cmd_visibility,
    "discriminate": cmd_discriminate,
}


def _emit(payload: dict, args) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        rows = payload.pop("sweep", None)
        if rows is None:
            raise ConfigError("csv output is only available for sweeps "
                              "(visibility command)")
        buf.write("v,mixed_bound,classical_bound\n")
        for v, bound, classical in rows:
            buf.write(f"{_sig(v)},{_sig(bound)},{_sig(classical)}\n")
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netbell",
        description="Nonlinear Bell inequalities for quantum networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a JSON run config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--mode", choices=["exhaustive", "random"], default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--output", default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        opts = _options(config, args)
        payload = _COMMANDS[args.command](config, args, opts)
    except NonConvergenceError as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        _emit({"partial": True, "best_value": _sig(exc.best_value)
               if exc.best_value is not None else None}, args)
        return 3
    except NetbellError as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    _emit(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
