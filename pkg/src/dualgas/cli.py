"""Command-line front end: spectra, figure pipelines, work statistics, EOS.

Commands write CSV tables (with a '#' key=value header carrying the
resolved configuration), JSON reports, and quick-look SVG rasters into
--out-dir.  A flat key=value config file can preset any flag; explicit
flags win.  Exit codes: 0 success, 2 configuration/schema error, 3
numeric failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import boxspec, eos, ringspec, work
from .core import (
    Adiabatic,
    Box,
    ConfigError,
    DimensionlessCoupling,
    LinearRamp,
    ModelSpec,
    Ring,
    SuddenCoupling,
    SuddenWall,
)
from .output import write_csv, write_json, write_svg_heatmap

__all__ = ["main"]


# --------------------------------------------------------------------------
# Configuration plumbing
# --------------------------------------------------------------------------

# Per-command schema: key -> (parser, default).  None defaults mean the key
# is required.  Global keys are merged into every command.
_GLOBAL_SCHEMA = {
    "out_dir": (str, "."),
    "threads": (int, 1),
    "hbar": (float, 1.0),
}


def _floats(text: str) -> List[float]:
    try:
        vals = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}") from exc
    if not vals:
        raise ConfigError(f"empty list {text!r}")
    return vals


def _ints(text: str) -> List[int]:
    try:
        vals = [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad int list {text!r}") from exc
    if not vals:
        raise ConfigError(f"empty list {text!r}")
    return vals


def _grid(text: str) -> np.ndarray:
    """start:stop:count -> inclusive linspace."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be start:stop:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc
    if n < 1:
        raise ConfigError(f"grid count must be >= 1, got {n}")
    return np.linspace(lo, hi, n)


_SCHEMAS: Dict[str, Dict[str, tuple]] = {
    "ring-spectrum": {
        "n": (int, 2),
        "lam": (float, 1.0),
        "c": (float, 1.0),
        "imax": (float, 10.0),
    },
    "box-spectrum": {
        "lam": (float, 1.0),
        "m": (int, 30),
        "c": (float, None),
        "alpha": (float, None),
        "n_levels": (int, 10),
    },
    "fig1": {
        "alpha": (float, 5.0),
        "lam": (float, 1.0),
        "m": (int, 60),
        "n_grid": (int, 257),
        "n_k": (int, 481),
        "n_x": (int, 513),
    },
    "work": {
        "geometry": (str, "box"),
        "protocol": (str, "adiabatic"),
        "n": (int, 2),
        "lam_i": (float, 1.0),
        "lam_f": (float, 2.0),
        "c": (float, 1.0),
        "c_f": (float, None),
        "beta": (float, 1.0),
        "imax": (float, 10.0),
        "m": (int, 14),
        "v": (float, 5.0),
        "tau": (float, 1.0),
        "merge_tol": (float, 1e-9),
    },
    "fig2": {
        "c_list": (_floats, [0.1, 1.0, 10.0]),
        "beta_list": (_floats, [1.0, 0.1, 0.01]),
        "protocol": (str, "ramp"),
        "lam": (float, 1.0),
        "v": (float, 5.0),
        "tau": (float, 1.0),
        "m": (int, 14),
    },
    "duality-check": {
        "alpha": (float, 5.0),
        "lam": (float, 1.0),
        "m": (int, 40),
        "states": (int, 2),
    },
    "convergence": {
        "alpha": (float, 5.0),
        "lam": (float, 1.0),
        "m_list": (_ints, [20, 40, 60]),
        "n_levels": (int, 6),
    },
    "eos": {
        "beta": (float, 1.0),
        "c": (float, 1.0),
        "mu_grid": (_grid, np.linspace(-5.0, 0.0, 11)),
        "hbar_sweep": (_floats, None),
        "density": (float, 0.1),
    },
}


@dataclass
class RunConfig:
    command: str
    values: Dict[str, object]
    out_dir: Path
    threads: int
    hbar: float

    def metadata(self) -> Dict[str, object]:
        # threads is execution plumbing: it never changes results, so it
        # stays out of the artifacts and outputs compare across machines.
        meta: Dict[str, object] = {"command": self.command, "hbar": self.hbar}
        for key, val in self.values.items():
            if isinstance(val, np.ndarray):
                meta[key] = "[" + "|".join(repr(float(v)) for v in val) + "]"
            elif isinstance(val, list):
                meta[key] = "[" + "|".join(str(v) for v in val) + "]"
            elif val is None:
                meta[key] = "none"
            else:
                meta[key] = val
        return meta


def _read_config_file(path: Path) -> Dict[str, str]:
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = line.split("=", 1)
        key = key.strip().replace("-", "_")
        # config files share the flag spelling; schema keys use the short form
        if key == "lambda" or key.startswith("lambda_"):
            key = "lam" + key[len("lambda"):]
        out[key] = val.strip()
    return out


def _resolve(args: argparse.Namespace) -> RunConfig:
    command = args.command
    schema = dict(_SCHEMAS[command])
    schema.update(_GLOBAL_SCHEMA)
    file_vals = (
        _read_config_file(Path(args.config)) if args.config else {}
    )
    unknown = sorted(set(file_vals) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {unknown}")
    resolved: Dict[str, object] = {}
    for key, (parse, default) in schema.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = parse(flag_val) if isinstance(flag_val, str) else flag_val
        elif key in file_vals:
            resolved[key] = parse(file_vals[key])
        else:
            resolved[key] = default
    out_dir = Path(str(resolved.pop("out_dir")))
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = int(resolved.pop("threads"))
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    hbar = float(resolved.pop("hbar"))
    if not (hbar > 0 and math.isfinite(hbar)):
        raise ConfigError(f"hbar must be positive and finite, got {hbar}")
    return RunConfig(command, resolved, out_dir, threads, hbar)


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Order-preserving map, threaded when asked; writes stay serialized."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _require(cfg: RunConfig, *keys: str) -> list:
    vals = []
    for key in keys:
        val = cfg.values.get(key)
        if val is None:
            raise ConfigError(f"{cfg.command} needs --{key.replace('_', '-')}")
        vals.append(val)
    return vals


def _bar_raster(values: np.ndarray, rows: int = 48) -> np.ndarray:
    """Render a nonnegative curve as a filled-bar raster for the SVG dump."""
    v = np.asarray(values, dtype=float)
    top = float(v.max())
    u = v / top if top > 0 else np.zeros_like(v)
    thresh = (rows - np.arange(rows, dtype=float)) / rows
    return np.where(u[None, :] >= thresh[:, None], u[None, :], 0.0)


def _jarzynski_residual(dist: work.WorkDistribution) -> Optional[float]:
    meta = dist.metadata or {}
    if "ln_z_initial" not in meta or "ln_z_final" not in meta:
        return None
    j = dist.jarzynski_average()
    if j <= 0:
        return math.inf
    ln_ratio = meta["ln_z_final"] - meta["ln_z_initial"]
    return abs(math.exp(math.log(j) - ln_ratio) - 1.0)


# --------------------------------------------------------------------------
# Command handlers
# --------------------------------------------------------------------------


def _cmd_ring_spectrum(cfg: RunConfig) -> None:
    n, lam, c, imax = (cfg.values[k] for k in ("n", "lam", "c", "imax"))
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if lam <= 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    table = ringspec.enumerate_states(lam, c, n, imax, hbar=cfg.hbar)
    states = table.states
    meta = cfg.metadata()
    meta["state_count"] = len(states)
    write_csv(
        cfg.out_dir / "ring_spectrum.csv",
        {
            "index": np.arange(len(states)),
            "energy": [st.energy for st in states],
            "momentum": [st.total_momentum for st in states],
            "residual": [st.residual for st in states],
            "quantum_numbers": [
                "|".join(format(q, "g") for q in st.quantum_numbers)
                for st in states
            ],
            "rapidities": [
                "|".join(repr(float(k)) for k in st.rapidities) for st in states
            ],
        },
        meta,
    )
    write_json(cfg.out_dir / "ring_spectrum_config.json", meta)


def _coupling_from(cfg: RunConfig, lam: float) -> float:
    c, alpha = cfg.values.get("c"), cfg.values.get("alpha")
    if c is not None and alpha is not None:
        raise ConfigError("give either --c or --alpha, not both")
    if c is None and alpha is None:
        raise ConfigError("one of --c / --alpha is required")
    if c is not None:
        return float(c)
    return DimensionlessCoupling(float(alpha)).coupling(lam, cfg.hbar)


def _cmd_box_spectrum(cfg: RunConfig) -> None:
    lam, m, n_levels = (cfg.values[k] for k in ("lam", "m", "n_levels"))
    coupling = _coupling_from(cfg, lam)
    model = ModelSpec(2, Box(lam), coupling, hbar=cfg.hbar)
    spec = boxspec.diagonalize(model, m)
    k = min(int(n_levels), spec.energies.size)
    contact = [
        boxspec.contact_expectation(spec.state(i, "boson")) for i in range(k)
    ]
    meta = cfg.metadata()
    meta.update(coupling=coupling, basis_dim=spec.basis.dim,
                residual=spec.residual)
    write_csv(
        cfg.out_dir / "box_spectrum.csv",
        {
            "index": np.arange(k),
            "energy": spec.energies[:k],
            "contact": contact,
        },
        meta,
    )
    write_json(cfg.out_dir / "box_spectrum_config.json", meta)


def _cmd_fig1(cfg: RunConfig) -> None:
    alpha, lam, m = (cfg.values[k] for k in ("alpha", "lam", "m"))
    n_grid, n_k, n_x = (cfg.values[k] for k in ("n_grid", "n_k", "n_x"))
    coupling = DimensionlessCoupling(alpha).coupling(lam, cfg.hbar)
    model = ModelSpec(2, Box(lam), coupling, hbar=cfg.hbar)
    spec = boxspec.diagonalize(model, m)
    meta = cfg.metadata()
    meta.update(coupling=coupling, basis_dim=spec.basis.dim)
    for idx, tag in ((0, "ground"), (1, "excited1")):
        for stat in ("boson", "fermion"):
            state = spec.state(idx, stat)
            dg = boxspec.spatial_density(state, n_grid=n_grid)
            head = dict(meta, state=tag, statistics=stat,
                        energy=state.energy, kind="spatial")
            stem = f"fig1_{tag}_spatial_{stat}"
            write_csv(cfg.out_dir / f"{stem}.csv",
                      {"x": dg.axis, "density": dg.values}, head)
            write_svg_heatmap(cfg.out_dir / f"{stem}.svg",
                              _bar_raster(dg.values), title=stem)
            mg = boxspec.momentum_density(state, n_k=n_k, n_x=n_x)
            head = dict(meta, state=tag, statistics=stat,
                        energy=state.energy, kind="momentum",
                        window_mass=mg.mass)
            stem = f"fig1_{tag}_momentum_{stat}"
            write_csv(cfg.out_dir / f"{stem}.csv",
                      {"k": mg.axis, "density": mg.values}, head)
            write_svg_heatmap(cfg.out_dir / f"{stem}.svg",
                              _bar_raster(mg.values), title=stem)
    write_json(cfg.out_dir / "fig1_config.json", meta)


def _protocol_from(cfg: RunConfig):
    name = str(cfg.values["protocol"])
    lam_i = float(cfg.values["lam_i"])
    if name == "adiabatic":
        return Adiabatic(lam_i, float(cfg.values["lam_f"]))
    if name == "sudden-wall":
        return SuddenWall(lam_i, float(cfg.values["lam_f"]))
    if name == "sudden-coupling":
        (c_f,) = _require(cfg, "c_f")
        return SuddenCoupling(float(cfg.values["c"]), float(c_f))
    if name == "ramp":
        return LinearRamp(lam_i, float(cfg.values["v"]), float(cfg.values["tau"]))
    raise ConfigError(f"unknown protocol {name!r}")


def _cmd_work(cfg: RunConfig) -> None:
    geometry = str(cfg.values["geometry"])
    lam_i = float(cfg.values["lam_i"])
    n = int(cfg.values["n"])
    coupling = float(cfg.values["c"])
    beta = float(cfg.values["beta"])
    if geometry == "ring":
        model = ModelSpec(n, Ring(lam_i), coupling, hbar=cfg.hbar)
        kwargs = {"i_max": float(cfg.values["imax"])}
    elif geometry == "box":
        model = ModelSpec(n, Box(lam_i), coupling, hbar=cfg.hbar)
        kwargs = {"cutoff": int(cfg.values["m"])}
    else:
        raise ConfigError(f"unknown geometry {geometry!r}")
    protocol = _protocol_from(cfg)
    dist = work.tpm_distribution(model, protocol, beta, **kwargs)
    merged = dist.merged(float(cfg.values["merge_tol"]))
    meta = cfg.metadata()
    meta.update({k: v for k, v in (dist.metadata or {}).items()
                 if isinstance(v, (int, float, str))})
    write_csv(
        cfg.out_dir / "work_atoms.csv",
        {"work": merged.works, "probability": merged.probabilities},
        meta,
    )
    m1, m2 = dist.moments(2)
    summary = dict(
        meta,
        mass=dist.mass,
        tail_mass=dist.tail_mass,
        mean_work=m1,
        second_moment=m2,
        jarzynski_average=dist.jarzynski_average(),
        jarzynski_residual=_jarzynski_residual(dist),
        atom_count=merged.works.size,
    )
    write_json(cfg.out_dir / "work_summary.json", summary)


def _cmd_fig2(cfg: RunConfig) -> None:
    c_list = list(cfg.values["c_list"])
    beta_list = list(cfg.values["beta_list"])
    protocol = str(cfg.values["protocol"])
    lam = float(cfg.values["lam"])
    v, tau, m = (float(cfg.values["v"]), float(cfg.values["tau"]),
                 int(cfg.values["m"]))
    lam_f = lam + v * tau

    def run_c(coupling: float):
        if protocol == "ramp":
            ramp = LinearRamp(lam, v, tau)
            res = work.propagate_ramp(ramp, coupling, m, cfg.hbar)
            return {
                beta: work.ramp_distribution(ramp, coupling, beta, m,
                                             cfg.hbar, result=res)
                for beta in beta_list
            }
        if protocol == "adiabatic":
            return {
                beta: work.adiabatic_box_distribution(
                    lam, lam_f, coupling, beta, m, hbar=cfg.hbar)
                for beta in beta_list
            }
        raise ConfigError(f"fig2 protocol must be ramp or adiabatic, "
                          f"got {protocol!r}")

    by_c = _pmap(run_c, c_list, cfg.threads)
    meta = cfg.metadata()
    report: Dict[str, object] = {"protocol": protocol, "lam_final": lam_f}
    for coupling, dists in zip(c_list, by_c):
        entry: Dict[str, object] = {}
        for beta in beta_list:
            dist = dists[beta]
            merged = dist.merged()
            head = dict(meta, c=coupling, beta=beta)
            head.update({k: val for k, val in (dist.metadata or {}).items()
                         if isinstance(val, (int, float, str))})
            write_csv(
                cfg.out_dir / f"fig2_C{coupling:g}_beta{beta:g}.csv",
                {"work": merged.works, "probability": merged.probabilities},
                head,
            )
            m1, m2 = dist.moments(2)
            entry[f"beta={beta:g}"] = {
                "mean_work": m1,
                "second_moment": m2,
                "jarzynski_residual": _jarzynski_residual(dist),
                "atom_count": merged.works.size,
            }
        report[f"c={coupling:g}"] = entry

    # Interaction sensitivity washes out toward the classical limit: the
    # distance between two couplings' distributions shrinks as beta drops.
    pairwise: Dict[str, object] = {}
    for (ca, da), (cb, db) in zip(
        list(zip(c_list, by_c))[:-1], list(zip(c_list, by_c))[1:]
    ):
        vals = [work.kolmogorov_distance(da[b], db[b]) for b in beta_list]
        pairwise[f"c={ca:g}|c={cb:g}"] = {
            "distances": dict(
                (f"beta={b:g}", v) for b, v in zip(beta_list, vals)
            ),
            "decreasing": bool(all(x > y for x, y in zip(vals, vals[1:]))),
        }
    report["kolmogorov_between_couplings"] = pairwise
    report["config"] = meta
    write_json(cfg.out_dir / "fig2_report.json", report)


def _cmd_duality_check(cfg: RunConfig) -> None:
    alpha, lam, m, n_states = (
        cfg.values[k] for k in ("alpha", "lam", "m", "states")
    )
    coupling = DimensionlessCoupling(alpha).coupling(lam, cfg.hbar)
    model = ModelSpec(2, Box(lam), coupling, hbar=cfg.hbar)
    spec = boxspec.diagonalize(model, m)
    meta = cfg.metadata()
    meta["coupling"] = coupling
    states = {}
    worst = 0.0
    for i in range(int(n_states)):
        bose = spec.state(i, "boson")
        fermi = spec.state(i, "fermion")
        db = boxspec.spatial_density(bose)
        df = boxspec.spatial_density(fermi)
        spatial_equal = bool(np.array_equal(db.values, df.values))
        spatial_l1 = boxspec.l1_distance(db, df)
        mb = boxspec.momentum_density(bose)
        mf = boxspec.momentum_density(fermi)
        momentum_l1 = boxspec.l1_distance(mb, mf)
        worst = max(worst, spatial_l1)
        states[f"state={i}"] = {
            "energy": bose.energy,
            "spatial_identical": spatial_equal,
            "spatial_l1": spatial_l1,
            "momentum_l1": momentum_l1,
        }
    report = dict(
        config=meta,
        passed=bool(worst <= 1e-10),
        max_spatial_l1=worst,
        **states,
    )
    write_json(cfg.out_dir / "duality_report.json", report)
    if worst > 1e-10:
        raise RuntimeError(
            f"duality violated: spatial L1 {worst:.3e} between bosonic and "
            "fermionized densities"
        )


def _cmd_convergence(cfg: RunConfig) -> None:
    alpha, lam, m_list, n_levels = (
        cfg.values[k] for k in ("alpha", "lam", "m_list", "n_levels")
    )
    coupling = DimensionlessCoupling(alpha).coupling(lam, cfg.hbar)
    model = ModelSpec(2, Box(lam), coupling, hbar=cfg.hbar)
    rows_m, rows_level, rows_e = [], [], []
    cusp = {}
    energy_table = []
    for m in m_list:
        spec = boxspec.diagonalize(model, int(m))
        k = min(int(n_levels), spec.energies.size)
        energy_table.append(spec.energies[:k])
        for lvl in range(k):
            rows_m.append(int(m))
            rows_level.append(lvl)
            rows_e.append(spec.energies[lvl])
        chk = boxspec.cusp_check(spec.state(0, "boson"))
        # 'residual' is already scale-normalized
        cusp[f"m={int(m)}"] = float(np.abs(chk["residual"]).max())
    meta = cfg.metadata()
    meta["coupling"] = coupling
    write_csv(
        cfg.out_dir / "convergence.csv",
        {"cutoff": rows_m, "level": rows_level, "energy": rows_e},
        meta,
    )
    table = np.array(energy_table)
    verdict = {
        "config": meta,
        "cusp_residual": cusp,
        "energies_nonincreasing": bool(
            np.all(np.diff(table, axis=0) <= 1e-12)
        ),
        "cusp_decreasing": bool(
            all(x > y for x, y in zip(cusp.values(), list(cusp.values())[1:]))
        ),
    }
    write_json(cfg.out_dir / "convergence_report.json", verdict)


def _cmd_eos(cfg: RunConfig) -> None:
    beta = float(cfg.values["beta"])
    coupling = float(cfg.values["c"])
    mu_grid = np.asarray(cfg.values["mu_grid"], dtype=float)
    meta = cfg.metadata()

    def point(mu: float):
        sol = eos.solve_yang_yang(beta, mu, coupling, cfg.hbar)
        dens = eos.density(beta, mu, coupling, cfg.hbar)
        return sol.pressure, dens, sol.iterations

    rows = _pmap(point, [float(m) for m in mu_grid], cfg.threads)
    write_csv(
        cfg.out_dir / "eos_isotherm.csv",
        {
            "mu": mu_grid,
            "pressure": [r[0] for r in rows],
            "density": [r[1] for r in rows],
            "iterations": [r[2] for r in rows],
        },
        meta,
    )
    coeffs = eos.fugacity_coefficients(beta, coupling, cfg.hbar)
    payload = dict(config=meta, beta=beta, coupling=coupling, **coeffs)
    write_json(cfg.out_dir / "eos_coefficients.json", payload)

    sweep = cfg.values.get("hbar_sweep")
    if sweep:
        target = float(cfg.values["density"])
        ratios = _pmap(
            lambda hb: eos.virial_ratio(beta, coupling, target, hb),
            list(sweep),
            cfg.threads,
        )
        write_csv(
            cfg.out_dir / "eos_virial_sweep.csv",
            {
                "hbar": list(sweep),
                "ratio_full": [r["full"] for r in ratios],
                "ratio_expansion": [r["expansion"] for r in ratios],
                "ratio_tabulated": [r["tabulated"] for r in ratios],
                "mu": [r["mu"] for r in ratios],
                "z": [r["z"] for r in ratios],
            },
            dict(meta, density_target=target),
        )


_HANDLERS: Dict[str, Callable[[RunConfig], None]] = {
    "ring-spectrum": _cmd_ring_spectrum,
    "box-spectrum": _cmd_box_spectrum,
    "fig1": _cmd_fig1,
    "work": _cmd_work,
    "fig2": _cmd_fig2,
    "duality-check": _cmd_duality_check,
    "convergence": _cmd_convergence,
    "eos": _cmd_eos,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualgas",
        description="Spectra, work statistics and thermodynamics of "
        "contact-interacting 1-D gas pairs.",
    )
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--out-dir", dest="out_dir")
    shared.add_argument("--config", dest="config")
    shared.add_argument("--threads", dest="threads", type=int)
    shared.add_argument("--hbar", dest="hbar", type=float)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ring-spectrum", parents=[shared],
                       help="enumerate periodic Bethe states below a cutoff")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--imax", type=float)

    p = sub.add_parser("box-spectrum", parents=[shared],
                       help="pair levels in a hard-wall box")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n-levels", dest="n_levels", type=int)

    p = sub.add_parser("fig1", parents=[shared],
                       help="spatial/momentum densities, bosonic vs "
                       "fermionized, ground and first excited states")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--n-grid", dest="n_grid", type=int)
    p.add_argument("--n-k", dest="n_k", type=int)
    p.add_argument("--n-x", dest="n_x", type=int)

    p = sub.add_parser("work", parents=[shared],
                       help="two-point-measurement work distribution for "
                       "one (model, protocol, beta)")
    p.add_argument("--geometry", choices=["ring", "box"])
    p.add_argument("--protocol",
                   choices=["adiabatic", "sudden-wall", "sudden-coupling",
                            "ramp"])
    p.add_argument("--n", type=int)
    p.add_argument("--lambda-i", dest="lam_i", type=float)
    p.add_argument("--lambda-f", dest="lam_f", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--c-f", dest="c_f", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--imax", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--v", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--merge-tol", dest="merge_tol", type=float)

    p = sub.add_parser("fig2", parents=[shared],
                       help="work distributions for a moving wall across "
                       "couplings and temperatures")
    p.add_argument("--c-list", dest="c_list")
    p.add_argument("--beta-list", dest="beta_list")
    p.add_argument("--protocol")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--m", type=int)

    p = sub.add_parser("duality-check", parents=[shared],
                       help="verify bosonic and fermionized pair states "
                       "share densities but not momentum distributions")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--states", type=int)

    p = sub.add_parser("convergence", parents=[shared],
                       help="basis-size scan: levels and cusp residuals")
    p.add_argument("--alpha", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m-list", dest="m_list")
    p.add_argument("--n-levels", dest="n_levels", type=int)

    p = sub.add_parser("eos", parents=[shared],
                       help="pressure/density isotherm and cluster "
                       "coefficients")
    p.add_argument("--beta", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--mu-grid", dest="mu_grid")
    p.add_argument("--hbar-sweep", dest="hbar_sweep")
    p.add_argument("--density", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        _HANDLERS[cfg.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"dualgas: config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"dualgas: numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0
