"""Polar codes: channel synthesis, construction, SC decoding and simulation."""

from .channels import ChannelDescriptor, DmcTable, bec, bsc, check_bounds
from .construction import CodeSpec, ReliabilityProfile, construct_polar, construct_rm
from .decoder import SCDecoder, genie_trace, llr_from_output, sc_decode
from .gf2 import BitVector, encode
from .simulate import TrialReport, run_bler
from .synthesis import bec_profile, brute_force_split, symmetric_z, synthesize_exact

__all__ = [
    "BitVector",
    "ChannelDescriptor",
    "CodeSpec",
    "DmcTable",
    "ReliabilityProfile",
    "SCDecoder",
    "TrialReport",
    "bec",
    "bec_profile",
    "brute_force_split",
    "bsc",
    "check_bounds",
    "construct_polar",
    "construct_rm",
    "encode",
    "genie_trace",
    "llr_from_output",
    "run_bler",
    "sc_decode",
    "symmetric_z",
    "synthesize_exact",
]
