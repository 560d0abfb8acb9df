"""
Hop-by-hop encrypted relay from a sensor node to its cluster head.

Every intermediate node decrypts with the key it shares with the previous node
and re-encrypts with the key it shares with the next one. Per-hop delay is
t_enc + t_tx + t_dec + delta_t; the total over n hops is n times that
(linear) or, taking the printed sum literally, sum(i * T) for i = 1..n
(summation). Runs are single-threaded and deterministic given the seed.
"""
import hashlib
import logging
from typing import List, Optional

from hopcrypt.models.base_models import (
    BLOCK_SIZE,
    CalibrationTable,
    DelayInterpretation,
    DelayParams,
    Direction,
    HopChain,
    HopRecord,
    Node,
    SimReport,
    SweepRow,
)
from hopcrypt.models.errors import BlockLengthError, HopCountError, IntegrityError, TopologyError
from hopcrypt.services.block_modes import CbcContext, cbc_decrypt, cbc_encrypt
from hopcrypt.services.mcu_timing import predict

logger = logging.getLogger(__name__)

CLUSTER_HEAD_ID = 0


# ============= DELAY MODEL =============

def hop_delay(params: DelayParams) -> float:
    return params.t_enc + params.t_tx + params.t_dec + params.delta_t


def _check_hops(n: int) -> None:
    if n < 1:
        raise HopCountError(f"Hop count must be at least 1, got {n}")


def total_delay(
    params: DelayParams,
    n: int,
    interpretation: DelayInterpretation = DelayInterpretation.LINEAR,
) -> float:
    _check_hops(n)
    per_hop = hop_delay(params)
    if interpretation == DelayInterpretation.SUMMATION:
        return n * (n + 1) // 2 * per_hop
    return n * per_hop


def sweep(
    params: DelayParams,
    n_max: int,
    interpretation: DelayInterpretation = DelayInterpretation.LINEAR,
) -> List[SweepRow]:
    """Total delay for every hop count 1..n_max"""
    _check_hops(n_max)
    return [
        SweepRow(n=n, total_delay_ms=total_delay(params, n, interpretation))
        for n in range(1, n_max + 1)
    ]


def delay_params_from_calibration(
    table: CalibrationTable,
    payload_size: int,
    t_tx: float = 10,
    delta_t: float = 0,
) -> DelayParams:
    """Per-hop t_enc / t_dec taken from the calibrated model for this payload size"""
    t_enc, _ = predict(table, payload_size, Direction.ENC)
    t_dec, _ = predict(table, payload_size, Direction.DEC)
    return DelayParams(t_enc=t_enc, t_dec=t_dec, t_tx=t_tx, delta_t=delta_t)


# ============= TOPOLOGY =============

def derive_pair_key(seed: int, a: int, b: int) -> bytes:
    """Pre-deployed pairwise key for nodes a and b (order-independent)"""
    lo, hi = sorted((a, b))
    return hashlib.sha256(f"hopcrypt-pair:{seed}:{lo}:{hi}".encode()).digest()[:16]


def hop_iv(seed: int, hop: int) -> bytes:
    return hashlib.sha256(f"hopcrypt-iv:{seed}:{hop}".encode()).digest()[:BLOCK_SIZE]


def build_chain(hops: int, seed: int = 0) -> HopChain:
    """N_1..N_hops followed by the cluster head, each pair sharing a derived key"""
    _check_hops(hops)
    ids = list(range(1, hops + 1)) + [CLUSTER_HEAD_ID]
    nodes = [Node(id=node_id) for node_id in ids]
    for left, right in zip(nodes, nodes[1:]):
        key = derive_pair_key(seed, left.id, right.id)
        left.keys[right.id] = key
        right.keys[left.id] = key
    # beacon and association requests carry no modeled delay
    for node in nodes[:-1]:
        logger.debug(f"Beacon/association N_{node.id} -> CH (zero cost)")
    logger.info(f"Built {hops}-hop chain to cluster head (seed {seed})")
    return HopChain(nodes=nodes)


def check_links(chain: HopChain) -> None:
    """Raise TopologyError unless every consecutive pair shares one key both ways"""
    by_id = {node.id: node for node in chain.nodes}
    for left, right in zip(chain.nodes, chain.nodes[1:]):
        outbound = left.key_for(right.id)
        inbound = right.key_for(left.id)
        if outbound is None or inbound is None:
            raise TopologyError(f"No pairwise key between node {left.id} and node {right.id}")
        if outbound != inbound:
            raise TopologyError(f"Nodes {left.id} and {right.id} hold different pairwise keys")
    for node in chain.nodes:
        for neighbor_id, key in node.keys.items():
            neighbor = by_id.get(neighbor_id)
            if neighbor is not None and neighbor.key_for(node.id) != key:
                raise TopologyError(f"Key between {node.id} and {neighbor_id} is not symmetric")


# ============= RELAY =============

def relay_message(
    chain: HopChain,
    plaintext: bytes,
    params: Optional[DelayParams] = None,
    seed: int = 0,
) -> SimReport:
    """Carry `plaintext` hop by hop to the cluster head with real CBC at every node"""
    params = params or DelayParams()
    check_links(chain)
    if not plaintext or len(plaintext) % BLOCK_SIZE:
        raise BlockLengthError(
            f"Relay payload length {len(plaintext)} is not a positive multiple of {BLOCK_SIZE}"
        )

    per_hop = hop_delay(params)
    ledger: List[HopRecord] = []
    current = plaintext
    for hop, (sender, receiver) in enumerate(zip(chain.nodes, chain.nodes[1:]), start=1):
        iv = hop_iv(seed, hop)
        outbound = CbcContext.from_key(sender.key_for(receiver.id), iv)
        msg_e = cbc_encrypt(outbound, current)

        inbound = CbcContext.from_key(receiver.key_for(sender.id), iv)
        current = cbc_decrypt(inbound, msg_e)

        ledger.append(HopRecord(
            hop=hop,
            sender=sender.id,
            receiver=receiver.id,
            msg_digest=hashlib.sha256(msg_e).hexdigest(),
            delay_ms=per_hop,
            cumulative_linear_ms=hop * per_hop,
            cumulative_summation_ms=hop * (hop + 1) // 2 * per_hop,
        ))
        logger.debug(f"Hop {hop}: N_{sender.id} -> N_{receiver.id}, {len(msg_e)} octets")

    if current != plaintext:
        raise IntegrityError(
            f"Cluster head {chain.cluster_head.id} recovered a different plaintext"
        )

    n = chain.hops
    return SimReport(
        hops=n,
        payload_size=len(plaintext),
        seed=seed,
        params=params,
        ledger=ledger,
        total_linear_ms=total_delay(params, n, DelayInterpretation.LINEAR),
        total_summation_ms=total_delay(params, n, DelayInterpretation.SUMMATION),
        plaintext_intact=True,
    )


def make_relay_payload(seed: int, size: int) -> bytes:
    digest = b""
    counter = 0
    while len(digest) < size:
        digest += hashlib.sha256(f"hopcrypt-payload:{seed}:{counter}".encode()).digest()
        counter += 1
    return digest[:size]
