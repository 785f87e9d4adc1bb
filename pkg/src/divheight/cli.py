"""Command-line front end: ``divheight <command> --map ... [options]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from . import heights
from .intervals import Interval
from .local import INFINITY, Place, green_pairing, lift_of, lyapunov_estimate, point_escape_rate
from .poly import DegreeMismatch, ParseError, PolyMap, parse_form, parse_map, parse_point
from .resultant import EliminationError, NotAMorphism, macaulay_resultant, push_forward

EXIT_OK, EXIT_PARSE, EXIT_REFUSED = 0, 2, 3

COMMANDS = (
    "resultant",
    "pushforward",
    "height",
    "canonical-height",
    "point-height",
    "critical-height",
    "green",
    "lyapunov",
    "budget",
    "check",
)


class UsageError(ValueError):
    pass


class Refusal(Exception):
    """Mathematically meaningless request; ``value`` is still printed."""

    def __init__(self, message: str, value=None):
        super().__init__(message)
        self.value = value


def eps_from_text(text: str) -> float:
    """Largest float not exceeding the decimal ``text`` (so width <= float implies width <= eps)."""
    try:
        q = Fraction(Decimal(text))
    except (InvalidOperation, ValueError):
        raise UsageError(f"bad eps {text!r}") from None
    if q <= 0:
        raise UsageError("eps must be positive")
    f = float(q)
    return f if Fraction(f) <= q else math.nextafter(f, 0.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="divheight", description="Certified canonical heights of divisors and points.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--N", type=int, help="projective dimension (checked against the map)")
    ap.add_argument("--d", type=int, help="degree (checked against the map)")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--map", help='comma-separated components, e.g. "X0^2,X1^2"')
    src.add_argument("--map-file", type=Path, help="one component per line")
    ap.add_argument("--form", help="defining form of a divisor")
    ap.add_argument("--point", help='rational point, e.g. "2,1" or "(2:1)"')
    ap.add_argument("--place", default="inf", help='"inf" or a prime')
    ap.add_argument("--eps", default="0.5")
    ap.add_argument("--max-k", type=int)
    ap.add_argument("--budget", choices=("sharp", "refined", "coarse"), default="sharp")
    ap.add_argument("--output", choices=("text", "json"), default="text")
    return ap


def _read_map(args) -> PolyMap:
    if args.map_file is not None:
        lines = [ln for ln in args.map_file.read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        F = parse_map(lines)
    elif args.map is not None:
        F = parse_map(args.map)
    else:
        raise UsageError("a map is required (--map or --map-file)")
    if args.N is not None and args.N != F.N:
        raise UsageError(f"--N {args.N} but the map has {F.N + 1} components")
    if args.d is not None and args.d != F.d:
        raise UsageError(f"--d {args.d} but the map has degree {F.d}")
    return F


def _need(args, name: str) -> str:
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required for {args.command}")
    return value


def _interval(enc: Interval | heights.HeightInterval) -> dict:
    return {"lo": enc.lo, "hi": enc.hi, "width": Interval(enc.lo, enc.hi).width}


def _budget_summary(b: heights.ErrorBudget) -> dict:
    return {
        "c8": b.c8.hi,
        "c9": b.c9.hi,
        "C1": b.C1,
        "logC2": b.logC2.hi,
        "h_hom": b.h_hom.hi,
        "B_refined": b.B_refined.hi,
    }


def _height_result(h: heights.HeightInterval) -> dict:
    return {
        "interval": _interval(h),
        "raw_estimate": h.raw_estimate,
        "certified": True,
        "raw_certified": False,
        "k_used": h.k_used,
        "converged": h.converged,
        "budget_kind": h.budget_kind,
    }


def run(args) -> tuple[dict, dict | None]:
    """Execute one command; returns (result, budget summary)."""
    F = _read_map(args)
    cmd = args.command
    eps = eps_from_text(args.eps)
    n = F.num_vars
    if cmd == "resultant":
        res = macaulay_resultant(F)
        if res == 0:
            raise Refusal("not a morphism", "0")
        return {"value": str(res), "certified": True}, None
    lift = lift_of(F)
    budget = heights.error_budget(F)
    summary = _budget_summary(budget)
    if cmd == "pushforward":
        phi = parse_form(_need(args, "form"), n)
        out = push_forward(F, phi)
        return {"value": str(out.form), "degree": out.form.degree, "certified": True}, summary
    if cmd == "height":
        return _height_result(heights.philippon_height(parse_form(_need(args, "form"), n))), summary
    if cmd == "canonical-height":
        phi = parse_form(_need(args, "form"), n)
        rep = heights.canonical_height_divisor(F, phi, eps, args.max_k, args.budget)
        out = _height_result(rep.canonical_height)
        out["naive"] = _interval(rep.naive_height)
        out["iterates"] = [r.raw for r in rep.iterates]
        return out, summary
    if cmd == "point-height":
        P = parse_point(_need(args, "point"))
        return _height_result(heights.canonical_height_point(F, P, eps, args.max_k, args.budget)), summary
    if cmd == "critical-height":
        rep = heights.critical_height(F, eps, args.max_k, args.budget)
        out = _height_result(rep.canonical_height)
        out["consistent_with_PCF"] = rep.consistent_with_pcf
        out["iterates"] = [r.raw for r in rep.iterates]
        return out, summary
    if cmd == "green":
        place = Place.parse(args.place)
        P = parse_point(_need(args, "point"))
        if args.form is None:
            rate = point_escape_rate(F, P, place, eps, args.max_k)
            return {
                "interval": _interval(rate.enclosure),
                "raw_estimate": rate.raw_estimate,
                "certified": True,
                "k_used": rate.k_used,
                "converged": rate.converged,
                "place": str(place),
            }, summary
        g = green_pairing(F, parse_form(args.form, n), P, place, eps, args.max_k)
        if g.infinite:
            raise Refusal("the point lies on the divisor: pairing is infinite", "inf")
        return {
            "interval": _interval(g.enclosure),
            "raw_estimate": g.raw_estimate,
            "certified": True,
            "k_used": max(g.form_rate.k_used, g.point_rate.k_used),
            "place": str(place),
        }, summary
    if cmd == "lyapunov":
        est = lyapunov_estimate(F, eps, args.max_k)
        return {"interval": _interval(est.enclosure), "raw_estimate": est.value, "certified": True, "k_used": est.k_used}, summary
    if cmd == "budget":
        return {
            "C1": budget.C1,
            "C2": str(budget.C2),
            "logC2": budget.logC2.hi,
            "c8": _interval(budget.c8),
            "c8_closed": _interval(budget.c8_closed),
            "c9": _interval(budget.c9),
            "B_upper": _interval(budget.B_upper),
            "B_lower": _interval(budget.B_lower),
            "res": str(lift.res),
            "refined_le_coarse": budget.refined_le_coarse,
            "certified": True,
        }, summary
    if cmd == "check":
        phi = parse_form(_need(args, "form"), n)
        rep = heights.theorem1_check(F, phi, eps, args.max_k, strict=False)
        if not rep.passed:
            raise Refusal("height bound violated", rep)
        return {
            "passed": rep.passed,
            "coarse_ok": rep.coarse_ok,
            "refined_upper_ok": rep.refined_upper_ok,
            "refined_lower_ok": rep.refined_lower_ok,
            "interval": _interval(rep.report.canonical_height),
            "certified": True,
        }, summary
    raise UsageError(f"unknown command {cmd}")  # pragma: no cover


def _echo(args) -> dict:
    keys = ("command", "N", "d", "map", "map_file", "form", "point", "place", "eps", "max_k", "budget")
    out = {k: getattr(args, k) for k in keys}
    if out["map_file"] is not None:
        out["map_file"] = str(out["map_file"])
    return out


def _text(result: dict) -> str:
    if "interval" in result:
        iv = result["interval"]
        lines = [f"interval            [{iv['lo']!r}, {iv['hi']!r}]  width {iv['width']!r}"]
        for key in ("raw_estimate", "k_used", "converged", "consistent_with_PCF", "passed", "place"):
            if key in result:
                lines.append(f"{key:<19} {result[key]}")
        return "\n".join(lines)
    if set(result) <= {"value", "certified", "degree"}:
        return str(result["value"])
    return "\n".join(f"{k:<17} {v}" for k, v in result.items())


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        result, summary = run(args)
        code = EXIT_OK
    except (ParseError, DegreeMismatch, UsageError) as exc:
        print(f"divheight: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NotAMorphism, EliminationError, heights.Theorem1Violation) as exc:
        print(f"divheight: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except Refusal as exc:
        print(exc.value if isinstance(exc.value, str) else "", end="\n" if isinstance(exc.value, str) else "")
        print(f"divheight: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as exc:
        print(f"divheight: {exc}", file=sys.stderr)
        return EXIT_PARSE
    elapsed = (time.perf_counter() - t0) * 1000
    if args.output == "json":
        doc = {"input": _echo(args), "result": result, "budget": summary, "timing_ms": round(elapsed, 3)}
        print(json.dumps(doc, indent=2))
    else:
        print(_text(result))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
