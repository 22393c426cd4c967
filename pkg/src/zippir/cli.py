"""Command-line drivers.

zippir-server --db <file> --config <file> [--bind HOST:PORT] [--store DIR]
zippir-client setup | query --index K | fetch-hints --count N |
              bench --profile P --out report.csv

Config is a JSON file holding the protocol parameters plus server
settings; command-line flags override it. Errors leave a machine-readable
JSON object on stderr and a nonzero exit status.
"""

import argparse
import json
import sys

from .lwe import LweParams
from .protocol import ProtocolParams

DEFAULT_PARAMS = {
    "n": 1400, "log2q": 32, "p": 256, "noise_sigma": 6.4,
    "key_dist": "binary", "paillier_bits": 3072,
    "d0": 1024, "d1": 1024, "hints_per_client": 4,
}


def _fail(kind: str, message: str, code: int = 1):
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    raise SystemExit(code)


def load_params(config_path=None, overrides=None):
    cfg = dict(DEFAULT_PARAMS)
    if config_path:
        with open(config_path) as fh:
            cfg.update(json.load(fh))
    cfg.update({k: v for k, v in (overrides or {}).items() if v is not None})
    lwe = LweParams(n=cfg["n"], q=1 << cfg["log2q"], p=cfg["p"],
                    noise_sigma=cfg["noise_sigma"], key_dist=cfg["key_dist"])
    return ProtocolParams(lwe=lwe, d0=cfg["d0"], d1=cfg["d1"],
                          paillier_bits=cfg["paillier_bits"],
                          hints_per_client=cfg.get("hints_per_client", 4)), cfg


def server_main(argv=None):
    ap = argparse.ArgumentParser(prog="zippir-server")
    ap.add_argument("--db", required=True, help="database file (see dbfile)")
    ap.add_argument("--config", help="JSON parameter/config file")
    ap.add_argument("--bind", default="127.0.0.1:7177")
    ap.add_argument("--store", help="hint-store directory (persistence)")
    args = ap.parse_args(argv)
    try:
        from . import dbfile
        from .server import PirServer, serve
        db = dbfile.load(args.db)
        params, cfg = load_params(args.config,
                                  {"d0": db.d0, "d1": db.d1, "p": db.p})
        host, _, port = args.bind.rpartition(":")
        pir = PirServer(params, db.symbols, store_dir=args.store)
        srv = serve(pir, host or "127.0.0.1", int(port))
        print(f"listening on {srv.server_address[0]}:{srv.server_address[1]} "
              f"(d0={params.d0}, d1={params.d1}, "
              f"hint entries per query={params.d1_prime})")
        try:
            _wait_forever()
        finally:
            srv.shutdown()
            pir.close()
    except FileNotFoundError as e:
        _fail("input", str(e))
    except (ValueError, KeyError) as e:
        _fail("input", str(e))
    return 0


def _wait_forever():
    import threading
    threading.Event().wait()


def client_main(argv=None):
    ap = argparse.ArgumentParser(prog="zippir-client")
    ap.add_argument("--config", help="JSON parameter/config file")
    ap.add_argument("--state", default="client_state.json")
    ap.add_argument("--server", default="127.0.0.1:7177")
    sub = ap.add_subparsers(dest="command", required=True)
    p_setup = sub.add_parser("setup")
    p_setup.add_argument("--force", action="store_true")
    p_query = sub.add_parser("query")
    p_query.add_argument("--index", type=int, required=True)
    p_query.add_argument("--mode", choices=["separate", "combined"],
                         default="separate")
    p_fetch = sub.add_parser("fetch-hints")
    p_fetch.add_argument("--count", type=int, default=1)
    p_bench = sub.add_parser("bench")
    p_bench.add_argument("--profile", required=True,
                         choices=["table2", "table3", "fig3", "protocol-desk"])
    p_bench.add_argument("--out")
    args = ap.parse_args(argv)
    try:
        return _client_dispatch(args)
    except FileNotFoundError as e:
        _fail("input", str(e))
    except FileExistsError as e:
        _fail("state", str(e))
    except (ValueError, IndexError) as e:
        _fail("input", str(e))
    except ConnectionError as e:
        _fail("protocol", str(e))


def _client_dispatch(args):
    if args.command == "bench":
        from .bench import run_profile
        rows = run_profile(args.profile, args.out)
        for r in rows:
            print(",".join(str(x) for x in r))
        return 0

    from . import client as client_mod
    from . import protocol
    params, _ = load_params(args.config)

    if args.command == "setup":
        state, hreq = protocol.setup(params)
        client_mod.save_state(state, args.state, force=args.force)
        transport = _connect(args)
        c = client_mod.PirClient(params, state, transport)
        c.register()
        print(f"registered; state saved to {args.state}")
        return 0

    state = client_mod.load_state(args.state)
    transport = _connect(args)
    c = client_mod.PirClient(params, state, transport)

    if args.command == "query":
        import time
        t0 = time.perf_counter()
        try:
            records, _ = c.retrieve(args.index, mode=args.mode)
        except client_mod.HintPending as e:
            client_mod.save_state(state, args.state, force=True)
            _fail("state", f"hint not ready for query {e.query_index}; "
                  "retry shortly", 3)
        client_mod.save_state(state, args.state, force=True)
        elapsed = time.perf_counter() - t0
        print(bytes(r % 256 for r in records).hex())
        print(f"sent {transport.bytes_sent} B, received "
              f"{transport.bytes_received} B, {elapsed:.3f} s")
        return 0

    if args.command == "fetch-hints":
        base = state.next_query_index
        for qi in range(base, base + args.count):
            c.fetch_hint(qi)
        print(f"fetched {args.count} hints starting at index {base}")
        return 0
    raise ValueError(f"unknown command {args.command}")


def _connect(args):
    from .client import Transport
    host, _, port = args.server.rpartition(":")
    return Transport(host or "127.0.0.1", int(port))
