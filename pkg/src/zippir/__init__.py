"""Single-server PIR with LWE-to-Paillier ciphertext compression."""

__version__ = "0.1.0"
