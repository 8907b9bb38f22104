"""Binary agent checkpoints.

Layout (all integers little-endian)::

    magic      8 bytes   b"ADRLCKPT"
    version    u32
    algo       u16 length + ASCII tag
    header     u32 length + UTF-8 JSON: hyperparameters, environment config,
               architecture descriptors, optimiser scalars, array manifest
    payload    float64 LE arrays in manifest order
    checksum   u32 CRC-32 of the payload

Network parameters come first (W0, b0, W1, b1, ... per network), then each
optimiser's first and second moments in the same order. Replay contents are
not stored.
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..agents import AGENTS, BaseAgent
from ..exceptions import AlgorithmMismatchError, FormatError

MAGIC = b"ADRLCKPT"
VERSION = 1
_HEADER_KEYS = {"params", "obs_dim", "env", "networks", "optimizers", "extra", "arrays"}


def _jsonable_params(agent: BaseAgent) -> dict:
    params = agent.get_params()
    return {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}


def checkpoint_bytes(agent: BaseAgent, env_config: dict | None = None) -> bytes:
    nets = agent.networks()
    optims = agent.optimizers()
    manifest = []
    arrays = []
    for name, net in nets.items():
        for i, p in enumerate(net.parameters()):
            manifest.append([f"{name}/{i}", list(p.shape)])
            arrays.append(p)
    for name, opt in optims.items():
        for moment, tensors in (("m", opt.first_moment), ("v", opt.second_moment)):
            for i, p in enumerate(tensors):
                manifest.append([f"adam:{name}/{moment}{i}", list(p.shape)])
                arrays.append(p)
    header = {
        "params": _jsonable_params(agent),
        "obs_dim": agent.obs_dim_,
        "env": env_config,
        "networks": {name: net.architecture() for name, net in nets.items()},
        "optimizers": {name: {"step_count": o.step_count, "alpha": o.alpha, "beta1": o.beta1, "beta2": o.beta2,
                              "eps_stab": o.eps_stab} for name, o in optims.items()},
        "extra": agent.extra_state(),
        "arrays": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    algo = agent.algo.encode("ascii")
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in arrays)
    return b"".join([
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<H", len(algo)), algo,
        struct.pack("<I", len(header_bytes)), header_bytes,
        payload,
        struct.pack("<I", zlib.crc32(payload)),
    ])


def save_checkpoint(agent: BaseAgent, path, env_config: dict | None = None) -> Path:
    path = Path(path)
    path.write_bytes(checkpoint_bytes(agent, env_config))
    return path


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, section: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated checkpoint: {section} needs {n} bytes, "
                              f"{len(self.data) - self.pos} remain", offset=self.pos, section=section)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, section: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), section))[0]


def read_checkpoint(data: bytes) -> tuple:
    """Parse checkpoint bytes into ``(algo, header, arrays)`` with full validation."""
    r = _Reader(data)
    magic = r.take(len(MAGIC), "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0, section="magic")
    version = r.unpack("<I", "version")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=len(MAGIC), section="version")
    algo_len = r.unpack("<H", "algo")
    algo = r.take(algo_len, "algo").decode("ascii", errors="replace")
    header_len = r.unpack("<I", "header")
    header_at = r.pos
    try:
        header = json.loads(r.take(header_len, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header: {exc}", offset=header_at, section="header") from exc
    missing = _HEADER_KEYS - set(header) if isinstance(header, dict) else _HEADER_KEYS
    if missing:
        raise FormatError(f"header lacks {sorted(missing)}", offset=header_at, section="header")
    payload_at = r.pos
    arrays = {}
    for name, shape in header["arrays"]:
        count = int(np.prod(shape, dtype=np.int64))
        raw = r.take(8 * count, f"payload:{name}")
        arrays[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    payload = data[payload_at:r.pos]
    checksum = r.unpack("<I", "checksum")
    if checksum != zlib.crc32(payload):
        raise FormatError("payload checksum mismatch", offset=payload_at, section="checksum")
    if r.pos != len(data):
        raise FormatError(f"{len(data) - r.pos} trailing bytes", offset=r.pos, section="trailer")
    return algo, header, arrays


def load_checkpoint(path, algo: str | None = None) -> tuple:
    """Rebuild an agent from ``path``. Returns ``(agent, env_config_dict)``.

    Pass ``algo`` to require a specific algorithm tag.
    """
    data = Path(path).read_bytes()
    tag, header, arrays = read_checkpoint(data)
    if algo is not None and tag != algo:
        raise AlgorithmMismatchError(f"checkpoint holds {tag!r}, requested {algo!r}", offset=len(MAGIC) + 4,
                                     section="algo")
    if tag not in AGENTS:
        raise FormatError(f"unknown algorithm tag {tag!r}", offset=len(MAGIC) + 4, section="algo")
    params = dict(header["params"])
    if "hidden_sizes" in params:
        params["hidden_sizes"] = tuple(params["hidden_sizes"])
    agent = AGENTS[tag](**params)
    agent.initialize(header["obs_dim"])

    for name, net in agent.networks().items():
        arch = header["networks"].get(name)
        if arch != net.architecture():
            raise FormatError(f"network {name!r} architecture {arch} does not match {net.architecture()}",
                              section=f"networks/{name}")
        _fill(net.parameters(), arrays, name)
    for name, opt in agent.optimizers().items():
        meta = header["optimizers"][name]
        opt.step_count = int(meta["step_count"])
        opt.alpha, opt.beta1, opt.beta2, opt.eps_stab = meta["alpha"], meta["beta1"], meta["beta2"], meta["eps_stab"]
        _fill(opt.first_moment, arrays, f"adam:{name}/m", sep="")
        _fill(opt.second_moment, arrays, f"adam:{name}/v", sep="")
    agent.load_extra_state(header["extra"])
    return agent, header.get("env")


def _fill(targets, arrays, prefix, sep="/"):
    for i, t in enumerate(targets):
        key = f"{prefix}{sep}{i}"
        src = arrays.get(key)
        if src is None or src.shape != t.shape:
            got = None if src is None else src.shape
            raise FormatError(f"array {key!r} has shape {got}, expected {t.shape}", section=key)
        t[...] = src

