"""Command-line surface: experiment runner and file-based I/O.

Subcommands
-----------
run      execute a JSON experiment config; writes results.csv + manifest.json
eval     winners, first-place counts, and pairwise margins of a profile file
audit    exhaustive small-election violation census for a rule and axiom
perturb  one noisy copy of a profile file (deterministic in the seed)
margins  exact expected margins of the 300-voter benchmark over a phi grid

Exit codes: 0 success, 1 runtime failure, 2 validation failure (unknown
names, malformed configs, unparsable profiles).  All randomness is seeded:
flag --seed beats the SMOOTHEDVOTES_SEED environment variable, which beats
the config's "seed" entry; there is no wall-clock fallback.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import __version__
from .core import (
    ArgumentError,
    ConfigurationError,
    ParseError,
    Profile,
    SmoothedVotesError,
    WitnessInvalidError,
    candidate_name,
    enumerate_rankings,
    format_profile,
    parse_profile,
)
from .noise import MODELS, berry_esseen_sup_gap, get_model, perturb_profile
from .rules import RULES, pairwise_margins, parse_rule_spec
from .axioms import (
    AXIOM_SPEC_NAMES,
    LIBRARY_NAMES,
    StrictCounterexample,
    brute_force_audit,
    counterexample_library,
    parse_axiom_spec,
)
from . import smoothed as sm

SEED_ENV_VAR = "SMOOTHEDVOTES_SEED"
EXPERIMENT_KINDS = (
    "estimate", "sweep", "thick-hyperplane", "group-flip",
    "audit", "margins", "diagnostics",
)


# --------------------------------------------------------------------------
# config loading and validation
# --------------------------------------------------------------------------

def _registry_epilog() -> str:
    return (
        "registered rules: " + ", ".join(sorted(RULES)) + ", psr:[w1,w2,...]\n"
        "registered models: " + ", ".join(sorted(MODELS)) + "\n"
        "registered axioms: " + ", ".join(AXIOM_SPEC_NAMES) + "\n"
        "base presets: " + ", ".join(sorted(sm.PRESETS)) + "\n"
        "counterexample library: " + ", ".join(LIBRARY_NAMES) + "\n"
        "experiment kinds: " + ", ".join(EXPERIMENT_KINDS)
    )


def _require(mapping: Mapping, key: str, context: str):
    if key not in mapping:
        raise ConfigurationError(f"{context}: missing required field {key!r}")
    return mapping[key]


def _positive_int(value, context: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigurationError(f"{context}: need a positive integer, got {value!r}")
    return value


def _phi_value(value, context: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigurationError(f"{context}: phi must be a number, got {value!r}")
    if not 0 <= value <= 1:
        raise ConfigurationError(f"{context}: phi must lie in [0, 1], got {value}")
    return float(value)


def _base_from_spec(spec, context: str) -> Union[Profile, StrictCounterexample, str]:
    """A base-profile source: fixed profile, library counterexample, preset
    name (regenerated per electorate size), or profile file."""
    if not isinstance(spec, Mapping):
        raise ConfigurationError(
            f"{context}: base must be an object with one of the keys "
            "'library', 'preset', 'file', 'counts'"
        )
    keys = set(spec)
    if "library" in keys:
        if not keys <= {"library", "params"}:
            raise ConfigurationError(f"{context}: unexpected base fields {sorted(keys)}")
        return counterexample_library(spec["library"], spec.get("params"))
    if "preset" in keys:
        if not keys <= {"preset", "n"}:
            raise ConfigurationError(f"{context}: unexpected base fields {sorted(keys)}")
        name = spec["preset"]
        if name not in sm.PRESETS:
            known = ", ".join(sorted(sm.PRESETS))
            raise ConfigurationError(f"{context}: unknown preset {name!r}; available: {known}")
        if "n" in spec:
            return sm.preset_profile(name, _positive_int(spec["n"], context))
        return name
    if "file" in keys:
        if keys != {"file"}:
            raise ConfigurationError(f"{context}: unexpected base fields {sorted(keys)}")
        return parse_profile(Path(spec["file"]).read_text())
    if "counts" in keys:
        if keys != {"counts"}:
            raise ConfigurationError(f"{context}: unexpected base fields {sorted(keys)}")
        counts = spec["counts"]
        for m in range(3, 7):
            if math.factorial(m) == len(counts):
                return Profile.from_counts(m, tuple(counts))
        raise ConfigurationError(
            f"{context}: counts length {len(counts)} is not m! for any m in 3..6"
        )
    raise ConfigurationError(
        f"{context}: base needs one of 'library', 'preset', 'file', 'counts'"
    )


def _base_voters(base: Union[Profile, StrictCounterexample, str], context: str) -> int:
    if isinstance(base, StrictCounterexample):
        return base.profile.n
    if isinstance(base, Profile):
        return base.n
    raise ConfigurationError(
        f"{context}: this experiment kind needs a fixed-size base "
        "(library, file, counts, or preset with 'n')"
    )


def _parse_ranking_text(text: str) -> Tuple[int, ...]:
    names = [part.strip() for part in text.split(">")]
    order = []
    for part in names:
        if len(part) != 1 or not "a" <= part <= "f":
            raise ConfigurationError(f"bad candidate {part!r} in ranking {text!r}")
        order.append(ord(part) - ord("a"))
    ranking = tuple(order)
    if sorted(ranking) != list(range(len(ranking))):
        raise ConfigurationError(f"{text!r} is not a permutation of the candidates")
    return ranking


class ExperimentConfig:
    """One validated experiment entry of a run config."""

    def __init__(self, raw: Mapping, index: int):
        if not isinstance(raw, Mapping):
            raise ConfigurationError(f"experiment #{index}: must be an object")
        self.name = _require(raw, "name", f"experiment #{index}")
        context = f"experiment {self.name!r}"
        self.kind = _require(raw, "kind", context)
        if self.kind not in EXPERIMENT_KINDS:
            known = ", ".join(EXPERIMENT_KINDS)
            raise ConfigurationError(
                f"{context}: unknown kind {self.kind!r}; available kinds: {known}"
            )
        self.raw = dict(raw)
        self.context = context
        getattr(self, f"_validate_{self.kind.replace('-', '_')}")()

    # ---- per-kind validation (resolves every referenced name) ----

    def _model(self, required: bool = True):
        name = self.raw.get("model", "mallows" if not required else None)
        if name is None:
            raise ConfigurationError(f"{self.context}: missing required field 'model'")
        self.model = get_model(name)

    def _rule(self, allow_none: bool = False):
        text = _require(self.raw, "rule", self.context)
        if text == "none":
            if not allow_none:
                raise ConfigurationError(
                    f"{self.context}: kind {self.kind!r} needs a concrete rule"
                )
            self.rule = None
        else:
            self.rule = parse_rule_spec(text)

    def _axiom(self):
        self.axiom = parse_axiom_spec(_require(self.raw, "axiom", self.context))

    def _trials(self):
        trials = _require(self.raw, "trials", self.context)
        if not isinstance(trials, int) or trials < sm.MIN_TRIALS:
            raise ConfigurationError(
                f"{self.context}: trials must be an integer >= {sm.MIN_TRIALS}, "
                f"got {trials!r}"
            )
        self.trials = trials

    def _base(self):
        self.base = _base_from_spec(_require(self.raw, "base", self.context), self.context)

    def _n_list(self):
        n_list = _require(self.raw, "n_list", self.context)
        if not isinstance(n_list, list) or not n_list:
            raise ConfigurationError(f"{self.context}: n_list must be a nonempty list")
        self.n_list = [_positive_int(n, self.context) for n in n_list]

    def _validate_estimate(self):
        self._rule(allow_none=True)
        self._axiom(); self._model(); self._trials(); self._base()
        self.phi = _phi_value(_require(self.raw, "phi", self.context), self.context)
        self.z = _positive_int(self.raw.get("z", 1), self.context)

    def _validate_sweep(self):
        self._rule(allow_none=True)
        self._axiom(); self._model(); self._trials(); self._base()
        phi_list = _require(self.raw, "phi_list", self.context)
        z_list = _require(self.raw, "z_list", self.context)
        if not isinstance(phi_list, list) or not phi_list:
            raise ConfigurationError(f"{self.context}: phi_list must be a nonempty list")
        if not isinstance(z_list, list) or not z_list:
            raise ConfigurationError(f"{self.context}: z_list must be a nonempty list")
        self.phi_list = [_phi_value(p, self.context) for p in phi_list]
        self.z_list = [_positive_int(z, self.context) for z in z_list]

    def _validate_thick_hyperplane(self):
        self._rule(); self._model(); self._trials(); self._base(); self._n_list()
        self.phi = _phi_value(_require(self.raw, "phi", self.context), self.context)
        self.delta_expr = _require(self.raw, "delta", self.context)
        self.delta = sm.DeltaSchedule.from_expr(self.delta_expr)

    def _validate_group_flip(self):
        self._rule(); self._model(); self._trials(); self._base(); self._n_list()
        self.phi = _phi_value(_require(self.raw, "phi", self.context), self.context)
        self.rho_expr = _require(self.raw, "rho", self.context)
        self.rho = sm.RhoSchedule(self.rho_expr)

    def _validate_audit(self):
        self._rule(allow_none=True)
        self.axiom_name = _require(self.raw, "axiom", self.context)
        parse_axiom_spec(self.axiom_name)
        self.n_max = _positive_int(_require(self.raw, "n_max", self.context), self.context)

    def _validate_margins(self):
        self._model(required=False)
        phi_list = _require(self.raw, "phi_list", self.context)
        if not isinstance(phi_list, list) or not phi_list:
            raise ConfigurationError(f"{self.context}: phi_list must be a nonempty list")
        self.phi_list = [_phi_value(p, self.context) for p in phi_list]

    def _validate_diagnostics(self):
        self._model(); self._trials(); self._n_list()
        self.phi = _phi_value(_require(self.raw, "phi", self.context), self.context)
        self.ranking = _parse_ranking_text(self.raw.get("ranking", "a>b>c"))


class RunConfig:
    def __init__(self, raw: Mapping):
        if not isinstance(raw, Mapping):
            raise ConfigurationError("config root must be a JSON object")
        self.name = raw.get("name", "run")
        self.seed = raw.get("seed")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigurationError(f"config seed must be a nonnegative integer, got {self.seed!r}")
        experiments = _require(raw, "experiments", "config")
        if not isinstance(experiments, list) or not experiments:
            raise ConfigurationError("config: experiments must be a nonempty list")
        self.experiments = [ExperimentConfig(e, i) for i, e in enumerate(experiments)]
        names = [e.name for e in self.experiments]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"config: duplicate experiment names in {names}")


def _effective_seed(flag_seed: Optional[int], config_seed: Optional[int]) -> int:
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
        if value < 0:
            raise ConfigurationError(f"{SEED_ENV_VAR} must be nonnegative, got {value}")
        return value
    if config_seed is not None:
        return config_seed
    raise ConfigurationError(
        "no seed: provide --seed, set " + SEED_ENV_VAR + ", or add \"seed\" to the config"
    )


# --------------------------------------------------------------------------
# experiment execution
# --------------------------------------------------------------------------

def _exact_row(experiment, rule, axiom, model, phi, n, z, trials, value, seed):
    return {
        "experiment": experiment, "rule": rule, "axiom": axiom, "model": model,
        "phi": float(phi), "n": n, "z": z, "trials": trials,
        "p_hat": float(value), "ci_low": float(value), "ci_high": float(value),
        "seed": seed, "ms": 0,
    }


def _run_experiment(exp: ExperimentConfig, seed: int, workers: int) -> List[Dict]:
    if exp.kind == "estimate":
        spec = exp.axiom
        n = _base_voters(exp.base, exp.context) * exp.z
        rho = spec.rho(n) if spec.kind == "group" else None
        axiom_name = "group-stability" if spec.kind == "group" else spec.base
        est = sm.estimate_violation(
            exp.rule, axiom_name, exp.base, exp.model, exp.phi, exp.trials,
            seed, z=exp.z, rho=rho, workers=workers,
        )
        result = sm.SweepResult(
            rule="none" if exp.rule is None else exp.rule.name,
            axiom=spec.text, model=exp.model.name,
            rows=(sm.SweepRow(n=n, z=exp.z, phi=exp.phi, estimate=est),),
        )
        return sm.sweep_csv_rows(exp.name, result, seed)

    if exp.kind == "sweep":
        spec = exp.axiom
        axiom_name = "group-stability" if spec.kind == "group" else spec.base
        rho_schedule = sm.RhoSchedule(spec.text.split("rho=", 1)[1]) if spec.kind == "group" else None
        result = sm.convergence_sweep(
            exp.rule, axiom_name, exp.base, exp.model, exp.phi_list, exp.z_list,
            exp.trials, seed, rho_schedule=rho_schedule, workers=workers,
        )
        result = sm.SweepResult(
            rule=result.rule, axiom=spec.text, model=result.model, rows=result.rows
        )
        return sm.sweep_csv_rows(exp.name, result, seed)

    if exp.kind == "thick-hyperplane":
        rows = sm.thick_hyperplane_probability(
            exp.rule, exp.base, exp.model, exp.phi, exp.delta, exp.n_list,
            exp.trials, seed, workers=workers,
        )
        return sm.diagnostic_csv_rows(
            exp.name, exp.rule.name, f"thick-hyperplane:delta={exp.delta_expr}",
            exp.model.name, exp.phi, rows, seed,
        )

    if exp.kind == "group-flip":
        rows = sm.group_flip_probability(
            exp.rule, exp.base, exp.model, exp.phi, exp.rho, exp.n_list,
            exp.trials, seed, workers=workers,
        )
        return sm.diagnostic_csv_rows(
            exp.name, exp.rule.name, f"group-stability:rho={exp.rho_expr}",
            exp.model.name, exp.phi, rows, seed,
        )

    if exp.kind == "audit":
        found = brute_force_audit(exp.rule, exp.axiom_name, exp.n_max)
        from .axioms import _all_profiles
        total = sum(1 for _ in _all_profiles(exp.n_max))
        rule_name = "none" if exp.rule is None else exp.rule.name
        return [_exact_row(
            exp.name, rule_name, exp.axiom_name, "none", 0.0,
            exp.n_max, 1, total, len(found) / total, seed,
        )]

    if exp.kind == "margins":
        rows = []
        for margin_row in sm.verify_appendixD_margins(exp.phi_list, model=exp.model):
            if not margin_row.matches_closed_form:
                raise SmoothedVotesError(
                    f"{exp.context}: computed margin departs from its closed form "
                    f"at phi={margin_row.phi}"
                )
            for label, value in (
                ("margin:b-over-a", margin_row.margin_b_over_a),
                ("margin:b-over-c", margin_row.margin_b_over_c),
                ("margin:plurality-gap-a-over-b", margin_row.plurality_gap_a_over_b),
            ):
                rows.append(_exact_row(
                    exp.name, "exact", label, exp.model.name, margin_row.phi,
                    sm.BENCHMARK_PROFILE.n, 1, 0, value, seed,
                ))
        return rows

    if exp.kind == "diagnostics":
        rows = []
        for n in exp.n_list:
            gap = berry_esseen_sup_gap(
                exp.model, exp.ranking, exp.phi, n, exp.trials, seed
            )
            rows.append(_exact_row(
                exp.name, "none", "berry-esseen-gap", exp.model.name, exp.phi,
                n, 1, exp.trials, gap, seed,
            ))
        return rows

    raise ConfigurationError(f"unhandled experiment kind {exp.kind!r}")


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    try:
        raw_bytes = config_path.read_bytes()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        raw = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    config = RunConfig(raw)
    seed = _effective_seed(args.seed, config.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    started = datetime.now(timezone.utc)
    all_rows: List[Dict] = []
    timings: List[Dict] = []
    for exp in config.experiments:
        t0 = time.perf_counter()
        rows = _run_experiment(exp, seed, args.workers)
        elapsed_ms = int(round(1000 * (time.perf_counter() - t0)))
        all_rows.extend(rows)
        timings.append({"experiment": exp.name, "rows": len(rows), "ms": elapsed_ms})
    results_path = out_dir / "results.csv"
    sm.write_csv(results_path, all_rows)
    finished = datetime.now(timezone.utc)

    manifest = {
        "name": config.name,
        "config_sha256": hashlib.sha256(raw_bytes).hexdigest(),
        "version": __version__,
        "seed": seed,
        "workers": args.workers,
        "started_utc": started.isoformat(),
        "finished_utc": finished.isoformat(),
        "outputs": [{"path": results_path.name, "rows": len(all_rows)}],
        "experiments": timings,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {results_path} ({len(all_rows)} rows) and manifest.json")
    return 0


# --------------------------------------------------------------------------
# other subcommands
# --------------------------------------------------------------------------

def _winner_text(winners) -> str:
    return "{" + ", ".join(candidate_name(c) for c in sorted(winners)) + "}"


def _cmd_eval(args) -> int:
    profile = parse_profile(Path(args.profile).read_text())
    rule = parse_rule_spec(args.rule)
    winners = rule.evaluate(profile)
    firsts = [0] * profile.m
    for r in profile.rankings:
        firsts[r[0]] += 1
    margins = pairwise_margins(profile)
    if args.json:
        payload = {
            "rule": rule.name,
            "winners": [candidate_name(c) for c in sorted(winners)],
            "first_place": {
                candidate_name(c): firsts[c] for c in range(profile.m)
            },
            "margins": [
                [margins.margin(x, y) for y in range(profile.m)]
                for x in range(profile.m)
            ],
        }
        print(json.dumps(payload, indent=2))
        return 0
    print(f"rule: {rule.name}")
    print(f"winners: {_winner_text(winners)}")
    print("first-place: " + "  ".join(
        f"{candidate_name(c)}={firsts[c]}" for c in range(profile.m)
    ))
    for x in range(profile.m):
        for y in range(x + 1, profile.m):
            value = margins.margin(x, y)
            print(f"margin {candidate_name(x)} vs {candidate_name(y)}: {value:+d}")
    return 0


def _profile_line(profile: Profile) -> str:
    rankings = enumerate_rankings(profile.m)
    parts = [
        f"{count} x {' > '.join(candidate_name(c) for c in rankings[j])}"
        for j, count in enumerate(profile.counts())
        if count
    ]
    return "; ".join(parts)


def _cmd_audit(args) -> int:
    rule = None if args.rule == "none" else parse_rule_spec(args.rule)
    found = brute_force_audit(rule, args.axiom, args.n_max, m=args.m)
    rule_name = "none" if rule is None else rule.name
    print(f"rule: {rule_name}  axiom: {args.axiom}  n_max: {args.n_max}")
    print(f"violations: {len(found)}")
    for item in found[:args.examples]:
        if isinstance(item, Profile):
            print("  " + _profile_line(item))
        elif args.axiom == "consistency":
            whole, (p1, p2) = item
            print(f"  {_profile_line(whole)}  |  split: "
                  f"[{_profile_line(p1)}] + [{_profile_line(p2)}]")
        else:
            p1, p2, a, b = item
            print(f"  {_profile_line(p1)}  ->  {_profile_line(p2)}  "
                  f"(pair {candidate_name(a)}, {candidate_name(b)})")
    return 0


def _cmd_perturb(args) -> int:
    profile = parse_profile(Path(args.profile).read_text())
    model = get_model(args.model)
    seed = _effective_seed(args.seed, None)
    noisy = perturb_profile(model, profile, args.phi, seed)
    sys.stdout.write(format_profile(noisy))
    return 0


def _cmd_margins(args) -> int:
    grid = []
    for part in args.phi_grid.split(","):
        try:
            grid.append(float(part))
        except ValueError:
            raise ConfigurationError(f"bad phi value {part!r} in --phi-grid") from None
    rows = sm.verify_appendixD_margins(grid)
    print(f"{'phi':>6}  {'b-over-a':>12}  {'b-over-c':>12}  {'plurality-gap':>14}  closed-form")
    for row in rows:
        print(
            f"{row.phi:>6.3f}  {float(row.margin_b_over_a):>12.8f}  "
            f"{float(row.margin_b_over_c):>12.8f}  "
            f"{float(row.plurality_gap_a_over_b):>14.8f}  "
            f"{'match' if row.matches_closed_form else 'MISMATCH'}"
        )
    return 0 if all(r.matches_closed_form for r in rows) else 1


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothedvotes",
        description="Axiom-violation experiments for voting rules under ranking noise.",
        epilog=_registry_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a JSON experiment config")
    run.add_argument("config", help="path to the config JSON")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=1, help="sampling worker threads")
    run.add_argument("--seed", type=int, default=None, help="override every other seed source")
    run.set_defaults(handler=_cmd_run)

    ev = sub.add_parser("eval", help="evaluate a rule on a profile file")
    ev.add_argument("profile", help="path to a profile text file")
    ev.add_argument("rule", help="rule spec (e.g. plurality, psr:[1,0.5,0])")
    ev.add_argument("--json", action="store_true", help="machine-readable output")
    ev.set_defaults(handler=_cmd_eval)

    audit = sub.add_parser("audit", help="exhaustive small-election census")
    audit.add_argument("rule")
    audit.add_argument("axiom")
    audit.add_argument("n_max", type=int)
    audit.add_argument("m", type=int, nargs="?", default=3)
    audit.add_argument("--examples", type=int, default=3, help="examples to print")
    audit.set_defaults(handler=_cmd_audit)

    pert = sub.add_parser("perturb", help="print one noisy copy of a profile")
    pert.add_argument("profile", help="path to a profile text file")
    pert.add_argument("--model", required=True)
    pert.add_argument("--phi", type=float, required=True)
    pert.add_argument("--seed", type=int, default=None)
    pert.set_defaults(handler=_cmd_perturb)

    marg = sub.add_parser("margins", help="exact benchmark margins over a phi grid")
    marg.add_argument("--phi-grid", required=True, help="comma-separated phi values")
    marg.set_defaults(handler=_cmd_margins)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigurationError, ArgumentError, WitnessInvalidError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SmoothedVotesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
