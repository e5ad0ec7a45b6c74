"""fogtrace: a desk-scale privacy-ledger laboratory.

A simulated UTXO blockchain with two anonymisation mechanisms layered on
top (ring signatures for senders, stealth addresses for receivers), a
regulatory identity-mapping layer with a tamper-evident audit trail, and
a forensic tracer that shows where investigation succeeds and where the
anonymisation defeats it.
"""

__version__ = "0.1.0"
