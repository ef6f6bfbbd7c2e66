# hqam_bicm/app/presenter.py
import logging
import time
import warnings
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import (ConfigError, ErrorHandler, HqamBicmError, NumericalValidityWarning)
from hqam_bicm.app.events import EventManager, EventTypes
from hqam_bicm.app.presets import get_preset
from hqam_bicm.app.session_manager import ManifestManager
from hqam_bicm.core.bounds import ub_curve, union_bound_grid
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import amplitudes, bits_per_symbol, build, build_unchecked, to_json, validate_region
from hqam_bicm.core.convcode import ConvCode, PuncturePattern, build_trellis, free_distance
from hqam_bicm.core.montecarlo import SimConfig, run_ber_sweep
from hqam_bicm.core.mux import DMuxPattern, RandomMuxTable, enumerate_canonical
from hqam_bicm.core.optimizer import (DesignSpace, alpha_grid, default_period, default_w_max, optimize,
                                      optimize_fading_fixed, optimize_rmux)
from hqam_bicm.core.spectrum import WeightSpectrum, compute_ewds, expected_ewds
from hqam_bicm.data.data_manager import ResultWriter, load_config_document
from hqam_bicm.data.models import ConstellationCard, DesignCard, SimConfigDocument
from hqam_bicm.data.validator import ConfigValidator
from hqam_bicm.utils.parsing import parse_float_list, parse_snr_grid
from hqam_bicm.utils.path_manager import PathManager

LOGGER = logging.getLogger(__name__)

EXAMPLE_MUX = "1:1,2:2,2:1/1:2,3:2,3:1"
EXAMPLE_WEIGHTS = {(2, 1, 2), (1, 2, 2)}

SCENARIO_KEYS = (
    "code", "mux", "rmux", "s_interleaver", "puncture", "q", "M", "alphas", "unchecked", "channel", "m",
    "snr", "wmax", "alpha_sweep", "J", "grid_step", "target", "ranked", "block_length", "min_errors",
    "max_blocks", "seed", "all_zero", "uncoded", "example2",
)


@dataclass
class CommandOutput:
    """Result of one command before it is written."""
    stem: str
    kind: str
    payload: Any
    config: Dict[str, Any]
    seed: Optional[int] = None


class CommandPresenter:
    """Runs CLI commands: resolves configuration, delegates numerics, writes results."""

    def __init__(self, view, path_manager: PathManager, jobs: int = 1, strict: bool = False,
                 events: Optional[EventManager] = None, gnuplot: bool = False):
        self.view = view
        self.path_manager = path_manager
        self.jobs = max(1, int(jobs))
        self.strict = strict
        self.gnuplot = gnuplot
        self.events = events if events is not None else EventManager()
        self.events.subscribe(EventTypes.BER_POINT_DONE, self._on_ber_point)
        self.events.subscribe(EventTypes.DESIGN_POINT_DONE, self._on_design_point)

    def _on_ber_point(self, point) -> None:
        self.view.show_message("Progress", f"{point.gamma_db:.2f} dB: BER {point.ber:.3e} ({point.errors} errors)")

    def _on_design_point(self, result) -> None:
        self.view.show_message("Progress", f"{result.gamma_db:.2f} dB: mux {result.mux}, alphas {list(result.alphas)}")

    # -- dispatch -----------------------------------------------------------

    def run(self, command: str, args) -> int:
        """Run a command and map failures to exit codes."""
        handlers = {
            "constellation": self.handle_constellation,
            "spectrum": self.handle_spectrum,
            "bound": self.handle_bound,
            "simulate": self.handle_simulate,
            "optimize": self.handle_optimize,
        }
        started = time.perf_counter()
        try:
            with warnings.catch_warnings():
                if self.strict:
                    warnings.simplefilter("error", NumericalValidityWarning)
                output = handlers[command](args)
            self._write(command, output, time.perf_counter() - started)
            return Config.EXIT_OK
        except NumericalValidityWarning as e:
            ErrorHandler.handle_error("Bound outside its validity range (--strict)", e, show_message=False)
            self.view.show_message("Validity", str(e), msg_type="error")
            return Config.EXIT_VALIDITY
        except (ConfigError, ValidationError) as e:
            ErrorHandler.handle_error(f"Invalid configuration for '{command}'", e, show_message=False)
            self.view.show_message("Configuration Error", str(e), msg_type="error")
            return Config.EXIT_CONFIG_ERROR
        except HqamBicmError as e:
            ErrorHandler.handle_error(f"Command '{command}' failed", e, show_message=False)
            self.view.show_message("Error", str(e), msg_type="error")
            return ErrorHandler.exit_code_for(e)

    def _write(self, command: str, output: CommandOutput, elapsed: float) -> None:
        suffix = ".dat" if output.kind == "csv" and self.gnuplot else f".{output.kind}"
        name = f"{output.stem}{suffix}"
        manager = ManifestManager(self.path_manager)
        manifest = manager.build(command, output.config, output.seed, [name])
        writer = ResultWriter(manifest.hash)
        path = self.path_manager.output_path(output.stem, suffix)
        if output.kind == "csv":
            saved = writer.save_csv(output.payload, path, gnuplot=self.gnuplot)
            self.view.emit_text(writer.to_gnuplot_text(output.payload) if self.gnuplot
                                else writer.to_csv_text(output.payload))
        else:
            saved = writer.save_json(output.payload, path)
            self.view.emit_json(writer.tag(output.payload))
        if not saved:
            raise HqamBicmError(f"could not write {path}")
        manifest.wall_time = round(elapsed, 3)
        manager.save_manifest(manifest)
        LOGGER.info(f"wrote {path} (manifest {manifest.hash})")

    # -- configuration helpers -----------------------------------------------

    def _scenarios(self, args, command: str) -> List[Dict[str, Any]]:
        base = {key: getattr(args, key, None) for key in SCENARIO_KEYS}
        preset = getattr(args, "preset", None)
        if not preset:
            return [base]
        scenarios = []
        for scenario in get_preset(preset, command):
            if base["channel"] is not None and base["channel"] != scenario.get("channel", base["channel"]):
                raise ConfigError(f"preset '{preset}' runs on the {scenario['channel']} channel, "
                                  f"not {base['channel']}")
            merged = dict(base)
            for key, value in scenario.items():
                if merged.get(key) in (None, False):
                    merged[key] = value
            scenarios.append(merged)
        return scenarios

    @staticmethod
    def _resolved(s: Dict[str, Any]) -> Dict[str, Any]:
        """Scenario values with defaults filled in, for manifests."""
        return {k: v for k, v in s.items() if v is not None and v is not False}

    @staticmethod
    def _code(s: Dict[str, Any]) -> ConvCode:
        return ConvCode.from_octal(s.get("code") or "5,7")

    @staticmethod
    def _channel(s: Dict[str, Any]) -> Channel:
        kind = s.get("channel") or "awgn"
        ok, errors = ConfigValidator.validate_channel(kind, s.get("m"))
        if not ok:
            raise ConfigError("; ".join(errors))
        return Channel.awgn(0.0) if kind == "awgn" else Channel.nakagami(s["m"], 0.0)

    @staticmethod
    def _w_max(s: Dict[str, Any], channel: Channel, q: int) -> int:
        if s.get("wmax"):
            return int(s["wmax"])
        return default_w_max(channel, q)

    @staticmethod
    def _constellation(s: Dict[str, Any]):
        return build(parse_float_list(s.get("alphas")), int(s.get("M") or 4))

    def _muxes(self, s: Dict[str, Any], code: ConvCode, q: int) -> List[Tuple[str, Any]]:
        """(mux id, DMuxPattern or RandomMuxTable) pairs selected by the scenario."""
        chosen = [k for k in ("mux", "rmux", "s_interleaver") if s.get(k)]
        if len(chosen) != 1:
            raise ConfigError("give exactly one of --mux, --rmux or --s-interleaver")
        if s.get("puncture") and chosen[0] == "mux":
            raise ConfigError("punctured codes are multiplexed by --rmux or --s-interleaver")
        if s.get("s_interleaver"):
            return [("s-interleaver", RandomMuxTable.s_interleaver(code.n, q))]
        if s.get("rmux"):
            table = RandomMuxTable.from_text(s["rmux"])
            return [(f"r-mux:{table.text}", table)]
        if s["mux"] == "all":
            J = int(s.get("J") or default_period(code.n, q))
            return [(p.text, p) for p in enumerate_canonical(code.n, J, q)]
        pattern = DMuxPattern.from_text(s["mux"], q=q, n=code.n)
        if pattern.q != q:
            raise ConfigError(f"D-MUX addresses {pattern.q} streams, the constellation has {q} bit levels")
        return [(pattern.text, pattern)]

    def _spectrum(self, code: ConvCode, mux, w_max: int, puncture: Optional[str]) -> WeightSpectrum:
        trellis = build_trellis(code)
        ok, errors = ConfigValidator.validate_wmax(w_max, free_distance(code))
        if not ok:
            LOGGER.warning("; ".join(errors))
        if isinstance(mux, DMuxPattern):
            return compute_ewds(trellis, mux, w_max, jobs=self.jobs)
        P = PuncturePattern.from_text(puncture) if puncture else None
        return expected_ewds(trellis, mux, w_max, puncture=P, jobs=self.jobs)

    # -- commands -----------------------------------------------------------------

    def handle_constellation(self, args) -> CommandOutput:
        """Constellation points, labels, mu table and region check."""
        s = self._scenarios(args, "constellation")[0]
        M = int(s.get("M") or 2)
        alphas = parse_float_list(s.get("alphas"))
        if s.get("unchecked"):
            ok, errors = ConfigValidator.validate_constellation(M, alphas)
            if not ok:
                LOGGER.warning("; ".join(errors))
            c = build_unchecked(alphas, M)
        else:
            c = build(alphas, M)
        card = ConstellationCard(**to_json(c, with_mu=validate_region(c.alphas).valid))
        return CommandOutput("constellation", "json", card.model_dump(), self._resolved(s))

    def handle_spectrum(self, args) -> CommandOutput:
        """Spectrum CSV for a code and multiplexer."""
        s = self._scenarios(args, "spectrum")[0]
        if s.get("example2"):
            s.update(code="5,7", mux=EXAMPLE_MUX, wmax=s.get("wmax") or 5, q=3)
        code = self._code(s)
        if not s.get("wmax"):
            raise ConfigError("--wmax is required")
        w_max = int(s["wmax"])
        if s.get("q"):
            q = int(s["q"])
        elif s.get("M"):
            q = bits_per_symbol(int(s["M"]))
        elif s.get("rmux"):
            q = RandomMuxTable.from_text(s["rmux"]).q
        elif s.get("mux") and s["mux"] not in ("identity", "all"):
            q = DMuxPattern.from_text(s["mux"], n=code.n).q
        else:
            q = code.n
        mux_id, mux = self._muxes(s, code, q)[0]
        LOGGER.info(f"spectrum of code {code.octal} with {mux_id}, wmax {w_max}")
        spectrum = self._spectrum(code, mux, w_max, s.get("puncture"))
        rows = spectrum.to_rows()
        if s.get("example2"):
            rows = [r for r in rows if tuple(r[f"w_{k + 1}"] for k in range(3)) in EXAMPLE_WEIGHTS]
        return CommandOutput("spectrum", "csv", rows, self._resolved(s))

    def handle_bound(self, args) -> CommandOutput:
        """Union-bound sweeps over SNR, or over the alpha grid with --alpha-sweep."""
        rows: List[Dict[str, Any]] = []
        config = []
        for s in self._scenarios(args, "bound"):
            code = self._code(s)
            channel = self._channel(s)
            M = int(s.get("M") or 4)
            q = bits_per_symbol(M)
            w_max = self._w_max(s, channel, q)
            snr = parse_snr_grid(s.get("snr") or "10")
            config.append(self._resolved(s))
            for mux_id, mux in self._muxes(s, code, q):
                spectrum = self._spectrum(code, mux, w_max, s.get("puncture"))
                if s.get("alpha_sweep"):
                    grid = alpha_grid(q, float(s.get("grid_step") or Config.DEFAULT_GRID_STEP))
                    for g in snr:
                        ub = union_bound_grid(spectrum, amplitudes(grid), channel.at_db(g), code.k_c)
                        for alphas, value in zip(grid, ub):
                            row = {"gamma_dB": g}
                            row.update({f"alpha_{k + 1}": float(a) for k, a in enumerate(alphas)})
                            row.update({"ub": float(value), "channel": channel.kind, "m": channel.m, "mux_id": mux_id})
                            rows.append(row)
                    continue
                if s.get("alphas") == "optimize":
                    if not isinstance(mux, RandomMuxTable):
                        raise ConfigError("--alphas optimize is only available for random multiplexers")
                    P = PuncturePattern.from_text(s["puncture"]) if s.get("puncture") else None
                    design = optimize_rmux(channel, float(np.median(snr)), code, M, mux,
                                           w_max=w_max, puncture=P)
                    c = build(list(design.alphas), M)
                    mux_id += " (alphas optimized)"
                else:
                    c = self._constellation(s)
                curve = ub_curve(spectrum, c, channel, snr, code.k_c)
                invalid = [g for g, r in zip(snr, curve) if not r.valid]
                if invalid:
                    message = (f"{mux_id}: union bound above {Config.BOUND_VALIDITY_LIMIT:g} "
                               f"at {len(invalid)} SNR point(s) up to {max(invalid):.2f} dB")
                    LOGGER.warning(message)
                    warnings.warn(message, NumericalValidityWarning)
                for g, r in zip(snr, curve):
                    rows.append({"gamma_dB": g, "ub": r.ub, "last_shell": r.last_shell, "channel": channel.kind,
                                 "m": channel.m, "alphas": ";".join(f"{a:g}" for a in c.alphas), "mux_id": mux_id})
        return CommandOutput("bound", "csv", rows, {"scenarios": config})

    def _sim_document(self, s: Dict[str, Any], doc: Dict[str, Any]) -> SimConfigDocument:
        values = dict(doc)
        for key in ("code", "mux", "rmux", "s_interleaver", "puncture", "M", "channel", "m", "block_length",
                    "min_errors", "max_blocks", "seed", "all_zero"):
            if s.get(key) not in (None, False):
                values[key] = s[key]
        if s.get("alphas") is not None:
            values["alphas"] = parse_float_list(s["alphas"])
        if s.get("snr") is not None:
            values["snr_db"] = parse_snr_grid(s["snr"])
        if s.get("uncoded"):
            values["code"] = None
        values.setdefault("M", 4)
        ok, errors = ConfigValidator.validate_simulation({
            "block_length": values.get("block_length", Config.DEFAULT_BLOCK_LENGTH),
            "min_errors": values.get("min_errors", Config.DEFAULT_MIN_ERRORS),
            "max_blocks": values.get("max_blocks", Config.DEFAULT_MAX_BLOCKS),
            "snr_db": values.get("snr_db"),
        })
        if not ok:
            raise ConfigError("; ".join(errors))
        return SimConfigDocument.model_validate(values)

    def handle_simulate(self, args) -> CommandOutput:
        """Monte Carlo BER sweeps."""
        doc = load_config_document(getattr(args, "config", None))
        rows: List[Dict[str, Any]] = []
        config = []
        seed = None
        for s in self._scenarios(args, "simulate"):
            document = self._sim_document(s, doc)
            c = self._constellation({"M": document.M, "alphas": ",".join(str(a) for a in document.alphas)})
            channel = self._channel({"channel": document.channel, "m": document.m})
            code = ConvCode.from_octal(document.code) if document.code is not None else None
            puncture = PuncturePattern.from_text(document.puncture) if document.puncture else None
            mux = None
            if code is not None:
                if puncture is not None:
                    mux = RandomMuxTable.s_interleaver(1, c.q)
                else:
                    _, mux = self._muxes(document.model_dump(), code, c.q)[0]
            cfg = SimConfig(code=code, mux=mux, constellation=c, channel=channel,
                            block_length=document.block_length, min_errors=document.min_errors,
                            max_blocks=document.max_blocks, seed=document.seed, puncture=puncture,
                            all_zero=document.all_zero)
            points = run_ber_sweep(cfg, document.snr_db, jobs=self.jobs, events=self.events)
            rows.extend(p.row(cfg.config_hash) for p in points)
            config.append(dict(cfg.describe(), snr_db=document.snr_db))
            seed = document.seed if seed is None else seed
        return CommandOutput("simulate", "csv", rows, {"scenarios": config}, seed)

    def handle_optimize(self, args) -> CommandOutput:
        """Design cards from the joint pattern and constellation search."""
        cards = []
        config = []
        for s in self._scenarios(args, "optimize"):
            code = self._code(s)
            channel = self._channel(s)
            M = int(s.get("M") or 4)
            w_max = self._w_max(s, channel, bits_per_symbol(M))
            step = float(s.get("grid_step") or Config.DEFAULT_GRID_STEP)
            J = int(s["J"]) if s.get("J") else None
            space = DesignSpace(code, M, J, w_max, step, self.jobs, self.events)
            config.append(self._resolved(s))
            if s.get("target"):
                if not channel.is_fading:
                    raise ConfigError("--target designs are frozen for Nakagami channels only")
                result = optimize_fading_fixed(channel.m, float(s["target"]), code, M, space=space)
                cards.append(DesignCard(**result.card(), target=float(s["target"])).model_dump())
                continue
            for g in parse_snr_grid(s.get("snr") or "10"):
                result = optimize(channel, g, code, M, space=space, ranked=bool(s.get("ranked")))
                cards.append(DesignCard(**result.card(), ranked=result.ranked).model_dump())
        return CommandOutput("optimize", "json", cards, {"scenarios": config})
