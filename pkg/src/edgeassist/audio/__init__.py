"""Speech front-end: framing, VAD, echo cancellation, denoising, dereverberation, wake word."""

from edgeassist.audio.aec import AecConfig, EchoCanceller, EchoCancellerState, aec_nlms
from edgeassist.audio.enhance import NoiseProfile, dereverb, estimate_noise, spectral_subtract
from edgeassist.audio.features import mfcc
from edgeassist.audio.frames import AudioFrame, Spectrum, frame_signal
from edgeassist.audio.pipeline import AudioFrontend, CleanUtterance, FrontendConfig, process_utterance
from edgeassist.audio.vad import VadConfig, VadDecision, VadTracker, compute_vad
from edgeassist.audio.wakeword import WakeMode, WakeState, detect_wakeword, dtw_distance, enroll

__all__ = [
    "AecConfig", "AudioFrame", "AudioFrontend", "CleanUtterance", "EchoCanceller",
    "EchoCancellerState", "FrontendConfig", "NoiseProfile", "Spectrum", "VadConfig",
    "VadDecision", "VadTracker", "WakeMode", "WakeState", "aec_nlms", "compute_vad",
    "dereverb", "detect_wakeword", "dtw_distance", "enroll", "estimate_noise",
    "frame_signal", "mfcc", "process_utterance", "spectral_subtract",
]
