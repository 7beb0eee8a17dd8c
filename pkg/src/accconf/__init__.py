"""Broadcast-encryption access control for cached content in information-centric networks."""

from .block import (BlockState, EnablingBlock, ProviderSigningKey, SubkeyPlan, build_block, build_reactive_block,
                    deserialize_block, make_clusters, plan_subkeys, precompute_partial_lagrangians,
                    refresh_timeout, revoke_user, serialize_block)
from .content import ContentName, Numbering, chunk_object, decrypt_content, encrypt_content, reassemble
from .extraction import ExtractionResult, extract, extract_no_precompute, recover_subkeys
from .group import SystemParams, generate_params, mod_exp, mod_inv, schnorr_params, zq_rand
from .rng import DeterministicRNG
from .shares import (Owner, SecretPolynomial, ShareTuple, UserRegistry, evaluate, generate_polynomial,
                     generate_shares, register_user)

__version__ = "0.1.0"
