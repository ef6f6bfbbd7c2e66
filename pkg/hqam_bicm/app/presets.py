# hqam_bicm/app/presets.py
"""
Named scenarios. A preset is pure configuration: each scenario is a set of
command-line values applied on top of the parsed arguments.
"""

from typing import Dict, List

from hqam_bicm.app.error_handler import ConfigError

Q3_OPTIMAL_MUX = "1,2,3/3,2,1"
Q3_FADING_MUX = "2,3,3/2,1,1"
Q2_OPTIMAL_MUX = "2,2/1,1"
RMUX_Q3_TABLE = "0,1/3,2/3;2/3,1/3,0"

PRESETS: Dict[str, Dict] = {
    "ub-vs-alpha-awgn": {
        "command": "bound",
        "description": "bound over alpha_1 for every canonical q=2 pattern, AWGN 10 dB",
        "scenarios": [
            {"code": "5,7", "M": 4, "mux": "all", "channel": "awgn", "snr": "10", "alpha_sweep": True, "wmax": 125},
        ],
    },
    "ub-vs-alpha-fading": {
        "command": "bound",
        "description": "bound over alpha_1 for every canonical q=2 pattern, Nakagami m=1 at 16 dB and m=5 at 12 dB",
        "scenarios": [
            {"code": "5,7", "M": 4, "mux": "all", "channel": "nakagami", "m": 1.0, "snr": "16",
             "alpha_sweep": True, "wmax": 30},
            {"code": "5,7", "M": 4, "mux": "all", "channel": "nakagami", "m": 5.0, "snr": "12",
             "alpha_sweep": True, "wmax": 30},
        ],
    },
    "alpha-vs-snr": {
        "command": "optimize",
        "description": "optimal q=2 design over SNR for AWGN and Nakagami m in {1, 5, 20}",
        "scenarios": [
            {"code": "5,7", "M": 4, "channel": "awgn", "snr": "5:20:1", "wmax": 125},
            {"code": "5,7", "M": 4, "channel": "nakagami", "m": 1.0, "snr": "10:30:1", "wmax": 30},
            {"code": "5,7", "M": 4, "channel": "nakagami", "m": 5.0, "snr": "8:24:1", "wmax": 30},
            {"code": "5,7", "M": 4, "channel": "nakagami", "m": 20.0, "snr": "6:22:1", "wmax": 30},
        ],
    },
    "design-q2-ber": {
        "command": "simulate",
        "description": "BER of the optimal q=2 design against BICM-S 4-PAM, AWGN",
        "scenarios": [
            {"code": "5,7", "M": 4, "mux": Q2_OPTIMAL_MUX, "alphas": "0.15", "channel": "awgn", "snr": "6:10:0.5"},
            {"code": "5,7", "M": 4, "s_interleaver": True, "alphas": "0.5", "channel": "awgn", "snr": "6:10:0.5"},
        ],
    },
    "design-q3-awgn": {
        "command": "optimize",
        "description": "joint search over the 30 canonical q=3 patterns, AWGN 10..15 dB",
        "scenarios": [
            {"code": "5,7", "M": 8, "channel": "awgn", "snr": "10:15:1", "wmax": 30, "ranked": True},
        ],
    },
    "design-q3-fading": {
        "command": "optimize",
        "description": "q=3 designs frozen at the SNR where the bound reaches 1e-7, Nakagami m in {1, 2, 5}",
        "scenarios": [
            {"code": "5,7", "M": 8, "channel": "nakagami", "m": m, "target": 1e-7, "wmax": 30}
            for m in (1.0, 2.0, 5.0)
        ],
    },
    "baselines-q3-awgn": {
        "command": "bound",
        "description": "q=3 bound curves: optimal design, BICM-S 8-PAM, R-MUX 8-PAM, R-MUX HPAM, punctured rate-3/4 4-PAM",
        "scenarios": [
            {"code": "5,7", "M": 8, "mux": Q3_OPTIMAL_MUX, "alphas": "0.44,0", "channel": "awgn",
             "snr": "8:16:0.25", "wmax": 30},
            {"code": "5,7", "M": 8, "s_interleaver": True, "alphas": "0.5,0.25", "channel": "awgn",
             "snr": "8:16:0.25", "wmax": 30},
            {"code": "5,7", "M": 8, "rmux": RMUX_Q3_TABLE, "alphas": "0.5,0.25", "channel": "awgn",
             "snr": "8:16:0.25", "wmax": 30},
            {"code": "5,7", "M": 8, "rmux": RMUX_Q3_TABLE, "alphas": "optimize", "channel": "awgn",
             "snr": "8:16:0.25", "wmax": 30},
            {"code": "5,7", "M": 4, "s_interleaver": True, "puncture": "10,11,01", "alphas": "0.5",
             "channel": "awgn", "snr": "8:16:0.25", "wmax": 30},
        ],
    },
}


def get_preset(name: str, command: str) -> List[Dict]:
    """Scenarios of a preset, checked against the command that runs it."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; choose from {', '.join(sorted(PRESETS))}")
    preset = PRESETS[name]
    if preset["command"] != command:
        raise ConfigError(f"preset '{name}' belongs to the '{preset['command']}' command")
    return [dict(s) for s in preset["scenarios"]]
