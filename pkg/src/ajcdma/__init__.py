"""Anti-jamming DS-CDMA link simulator.

Two receivers are compared under rank-controlled multi-tone frequency-hopping
jamming and a frequency-selective downlink: FastICA alone (Type1), and Robust
PCA in the Walsh domain followed by FastICA (Type2).
"""

from .channel import ChannelProfile, PROFILES, equalize, received, sample_channel
from .ica import IcaParams, fast_ica
from .jamming import JammingSpec, gen_jamming, scale_to_sjr
from .receiver import ReceiverConfig, ReceiverKind, ber, resolve_ambiguity, run_type1, run_type2
from .rpca import DecompositionResult, RpcaParams, rpca_ialm
from .waveform import despread, gen_bits, gen_code_schedule, spread, walsh

__version__ = "0.1.0"
