"""
Experiment configuration
JSON preset files are merged over the defaults below, then dotted-key overrides from
the command line are applied. Every field is addressable as e.g. stages.pretrain.lr.
"""
import json
import logging
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union, get_args, get_origin, get_type_hints

import numpy as np

from ..errors import ConfigError
from ..masking.views import PHI_CANONICAL, THETA_CANONICAL, MaskSpec
from ..models.stgcn import EncoderConfig
from ..objectives.barlow import BarlowLossConfig
from ..objectives.distill import DistillConfig
from ..skeleton.augment import AugmentationSpec
from ..skeleton.sequence import STREAMS
from ..utils import digest_hex

logger = logging.getLogger(__name__)

# keys kept in preset files for people, never read
IGNORED_KEYS = ('comment', 'help')
STAGE_NAMES = ('pretrain', 'probe', 'finetune', 'finetune_align', 'distill', 'readout')
PRECISIONS = {'float32': np.float32, 'float64': np.float64}


@dataclass(frozen=True)
class SyntheticSettings:
    classes: int = 4
    per_class: int = 50


@dataclass(frozen=True)
class DataConfig:
    """
    Attributes:
        path: Cache file, .skeleton file or directory, or "synthetic"
        frames: Frame count every sequence is resampled to
        stream: 'joint', 'bone', 'motion' or '3s' (three runs fused at evaluation)
        body: 'first' or 'all' tracked bodies per NTU file
        holdout_ratio: Fraction of samples in the held-out split
    """

    path: str = 'synthetic'
    frames: int = 50
    stream: str = 'joint'
    body: str = 'first'
    holdout_ratio: float = 0.2
    synthetic: SyntheticSettings = field(default_factory=SyntheticSettings)

    def __post_init__(self):
        if self.stream not in STREAMS + ('3s',):
            raise ConfigError(f"stream must be one of {STREAMS + ('3s',)}, got '{self.stream}'")
        if self.body not in ('first', 'all'):
            raise ConfigError(f"body must be 'first' or 'all', got '{self.body}'")
        if self.frames < 2:
            raise ConfigError("frames must be at least 2")
        if not (0.0 < self.holdout_ratio < 1.0):
            raise ConfigError("holdout_ratio must be in (0, 1)")


@dataclass(frozen=True)
class AugmentSettings:
    crop_ratio_range: Tuple[float, float] = (0.6, 1.0)
    rotation_max_deg: float = 17.0
    flip_probability: float = 0.5

    def __post_init__(self):
        self.to_spec(0)

    def to_spec(self, seed: int) -> AugmentationSpec:
        return AugmentationSpec(self.crop_ratio_range, self.rotation_max_deg, self.flip_probability, seed)


@dataclass(frozen=True)
class MaskingConfig:
    theta: MaskSpec = THETA_CANONICAL
    phi: MaskSpec = PHI_CANONICAL
    resample_each_epoch: bool = True


@dataclass(frozen=True)
class ProjectorSettings:
    """Projector widths; 'shared' uses one projector for both encoders"""

    hidden_dim: int = 6144
    out_dim: int = 6144
    depth: int = 3
    shared: bool = False


@dataclass(frozen=True)
class AlignSettings:
    num_heads: int = 4
    attention_bias: bool = False
    align_norm: bool = False


@dataclass(frozen=True)
class StageConfig:
    epochs: int
    batch_size: int
    lr: float
    weight_decay: float = 0.0
    warmup_epochs: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be at least 2")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.weight_decay < 0 or not (0 <= self.warmup_epochs <= self.epochs):
            raise ConfigError("weight_decay must be >= 0 and warmup_epochs within [0, epochs]")


@dataclass(frozen=True)
class StagesConfig:
    pretrain: StageConfig = StageConfig(epochs=150, batch_size=128, lr=1e-3, weight_decay=1e-5, warmup_epochs=10)
    probe: StageConfig = StageConfig(epochs=150, batch_size=128, lr=1e-3)
    finetune: StageConfig = StageConfig(epochs=150, batch_size=128, lr=5e-3, weight_decay=1e-5, warmup_epochs=10)
    finetune_align: StageConfig = StageConfig(epochs=50, batch_size=128, lr=1e-4)
    distill: StageConfig = StageConfig(epochs=150, batch_size=128, lr=1e-2, weight_decay=1e-5, warmup_epochs=10)
    readout: StageConfig = StageConfig(epochs=100, batch_size=128, lr=1e-3)


@dataclass(frozen=True)
class ExperimentSettings:
    """Grids swept by the experiment commands"""

    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    taus: Tuple[float, ...] = (2.0, 4.0, 6.0, 8.0, 9.0, 12.0)
    student_layers: Tuple[int, ...] = (3, 5, 7)
    mask_joints: Tuple[int, ...] = (3, 6, 9, 12)
    mask_frames: Tuple[int, ...] = (5, 10, 15)


@dataclass(frozen=True)
class TrainConfig:
    """Full record of one experiment; its digest identifies the run"""

    seed: int = 0
    precision: str = 'float32'
    data: DataConfig = field(default_factory=DataConfig)
    augment: AugmentSettings = field(default_factory=AugmentSettings)
    masking: MaskingConfig = field(default_factory=MaskingConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    student: EncoderConfig = field(
        default_factory=lambda: EncoderConfig(num_layers=5, hidden_channels=16, spatial_kernel=3,
                                              temporal_kernel=9, embed_dim=128))
    projector: ProjectorSettings = field(default_factory=ProjectorSettings)
    barlow: BarlowLossConfig = field(default_factory=BarlowLossConfig)
    align: AlignSettings = field(default_factory=AlignSettings)
    distill: DistillConfig = field(default_factory=DistillConfig)
    stages: StagesConfig = field(default_factory=StagesConfig)
    experiments: ExperimentSettings = field(default_factory=ExperimentSettings)

    def __post_init__(self):
        if self.precision not in PRECISIONS:
            raise ConfigError(f"precision must be one of {sorted(PRECISIONS)}, got '{self.precision}'")
        if self.encoder.embed_dim % self.align.num_heads != 0:
            raise ConfigError(
                f"encoder.embed_dim {self.encoder.embed_dim} is not divisible by align.num_heads {self.align.num_heads}")
        for name, spec in (('theta', self.masking.theta), ('phi', self.masking.phi)):
            if spec.k_frames >= self.data.frames:
                raise ConfigError(f"masking.{name}.k_frames must be below data.frames ({self.data.frames})")

    @property
    def dtype(self):
        return PRECISIONS[self.precision]

    def stage(self, name: str) -> StageConfig:
        if name not in STAGE_NAMES:
            raise ConfigError(f"unknown stage '{name}'")
        return getattr(self.stages, name)

    def augmentation(self) -> AugmentationSpec:
        return self.augment.to_spec(self.seed)

    def to_dict(self) -> Dict[str, Any]:
        return _plain(asdict(self))

    def digest(self) -> str:
        return digest_hex(self.to_dict())

    def with_overrides(self, overrides: Dict[str, Any]) -> 'TrainConfig':
        raw = self.to_dict()
        for key, value in overrides.items():
            set_dotted(raw, key, value)
        return config_from_dict(raw)

    def with_masks(self, spatial: str, temporal: str, n_joints: Optional[int] = None,
                   k_frames: Optional[int] = None) -> 'TrainConfig':
        """Apply one (spatial, temporal) pair and counts to both encoders"""
        def adjust(spec: MaskSpec) -> MaskSpec:
            return replace(spec, spatial_mode=spatial, temporal_mode=temporal,
                           n_joints=spec.n_joints if n_joints is None else n_joints,
                           k_frames=spec.k_frames if k_frames is None else k_frames)
        return replace(self, masking=replace(self.masking, theta=adjust(self.masking.theta),
                                             phi=adjust(self.masking.phi)))


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _coerce(value: Any, hint, key: str):
    origin = get_origin(hint)
    if origin is Union:
        options = [a for a in get_args(hint) if a is not type(None)]
        if value is None and len(options) < len(get_args(hint)):
            return None
        return _coerce(value, options[0], key)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"'{key}' must be a list")
        args = get_args(hint)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(v, args[0], key) for v in value)
        if len(value) != len(args):
            raise ConfigError(f"'{key}' must have {len(args)} entries")
        return tuple(_coerce(v, a, key) for v, a in zip(value, args))
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"'{key}' must be true or false")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' must be a number")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{key}' must be a string")
        return value
    return value


def _build(cls, raw: Any, path: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"'{path or 'config'}' must be an object")
    hints = get_type_hints(cls)
    names = [f.name for f in fields(cls)]
    unknown = sorted(k for k in raw if k not in names and k not in IGNORED_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key '{_join(path, unknown[0])}'")
    kwargs = {}
    for name in names:
        if name not in raw:
            continue
        key = _join(path, name)
        hint = hints[name]
        kwargs[name] = _build(hint, raw[name], key) if is_dataclass(hint) else _coerce(raw[name], hint, key)
    try:
        return cls(**kwargs)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}" if path else str(e))
    except TypeError as e:
        raise ConfigError(f"'{path or 'config'}' is incomplete: {e}")


def _join(path: str, name: str) -> str:
    return f"{path}.{name}" if path else name


def config_from_dict(raw: Dict[str, Any]) -> TrainConfig:
    return _build(TrainConfig, raw, '')


def set_dotted(raw: Dict[str, Any], key: str, value: Any):
    """Set a dotted key in a nested dict, refusing keys the config does not define"""
    parts = key.split('.')
    node = raw
    for i, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown config key '{key}'")
        if i == len(parts) - 1:
            node[part] = value
        else:
            node = node[part]


def parse_override(text: str) -> Tuple[str, Any]:
    """'a.b=value' with value read as JSON when possible, else as a string"""
    key, sep, value = text.partition('=')
    if not sep or not key.strip():
        raise ConfigError(f"override '{text}' is not of the form key=value")
    try:
        parsed = json.loads(value)
    except ValueError:
        parsed = value
    return key.strip(), parsed


def _merge(base: Dict[str, Any], update: Dict[str, Any], path: str = ''):
    for key, value in update.items():
        if key in IGNORED_KEYS:
            continue
        dotted = _join(path, key)
        if key not in base:
            raise ConfigError(f"unknown config key '{dotted}'")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, dotted)
        else:
            base[key] = value


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> TrainConfig:
    """
    Resolve a configuration
    Args:
        path: JSON preset file, None for the built-in defaults
        overrides: Dotted key to value, applied after the file
    """
    raw = TrainConfig().to_dict()
    if path is not None:
        path = Path(path)
        try:
            with open(path, 'r') as f:
                loaded = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} does not exist")
        except ValueError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        _merge(raw, loaded)
    for key, value in (overrides or {}).items():
        set_dotted(raw, key, value)
    config = config_from_dict(raw)
    logger.debug("resolved config %s", config.digest()[:12])
    return config
