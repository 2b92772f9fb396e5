"""
TCP backend: one OS process (or thread) per rank, full mesh of length-prefixed frames.

Outgoing connections are opened lazily on the first send to a peer. Every
accepted connection gets a reader thread that drains frames into the
endpoint's mailbox, so senders only block for the duration of sendall.
"""

import time
import socket
import logging
import threading

from .config import TRANSPORT_SETTINGS
from .errors import StarvedReceiveError, StartupError, TransportError
from .maybe import NOTHING, Maybe
from .transport import HEADER, Endpoint, Frame, LaunchOutcome, Mailbox, decode_header

logger = logging.getLogger(__name__)


def _recv_exact(sock, count):
    chunks = []
    remaining = count
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b''.join(chunks)


class TcpEndpoint(Endpoint):

    def __init__(self, rank, hosts, receive_timeout=None, connect_timeout=None):
        super().__init__(rank, len(hosts))
        self.hosts = [(str(address), int(port)) for address, port in hosts]
        self.receive_timeout = receive_timeout or TRANSPORT_SETTINGS['receive_timeout_seconds']
        self.connect_timeout = connect_timeout or TRANSPORT_SETTINGS['connect_timeout_seconds']
        self.mailbox = Mailbox()
        self._arrived = threading.Condition()
        self._outgoing = {}
        self._send_locks = {}
        self._incoming = []
        self._listener = None
        self._accept_thread = None
        if self.world_size > 1:
            self._listen()

    def _listen(self):
        address = self.hosts[self.rank]
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            listener.bind(address)
        except OSError as e:
            listener.close()
            raise StartupError(self.rank, address, f"cannot listen: {str(e)}")
        listener.listen(TRANSPORT_SETTINGS['listen_backlog'])
        listener.settimeout(0.2)
        self._listener = listener
        self._accept_thread = threading.Thread(target=self._accept_loop, name=f'dpd-accept-{self.rank}',
                                               daemon=True)
        self._accept_thread.start()
        logger.info(f"rank {self.rank} listening on {address[0]}:{address[1]}")

    def _accept_loop(self):
        while not self.closed:
            try:
                conn, peer = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            conn.settimeout(None)
            self._incoming.append(conn)
            threading.Thread(target=self._read_loop, args=(conn,), name=f'dpd-reader-{self.rank}',
                             daemon=True).start()

    def _read_loop(self, conn):
        while not self.closed:
            try:
                header = _recv_exact(conn, HEADER.size)
                if header is None:
                    break
                src, dst, tag, length = decode_header(header)
                payload = _recv_exact(conn, length) if length else b''
                if payload is None:
                    logger.warning(f"rank {self.rank}: connection from rank {src} closed mid-frame")
                    break
            except OSError:
                break
            if dst != self.rank:
                logger.error(f"rank {self.rank}: dropping frame addressed to rank {dst}")
                continue
            self._put(Frame(src, dst, tag, payload))
        conn.close()

    def _put(self, frame):
        with self._arrived:
            self.mailbox.put(frame)
            self._arrived.notify_all()

    def _connection(self, dst):
        sock = self._outgoing.get(dst)
        if sock is not None:
            return sock
        address = self.hosts[dst]
        deadline = time.monotonic() + self.connect_timeout
        while True:
            try:
                sock = socket.create_connection(address, timeout=self.connect_timeout)
                break
            except OSError as e:
                if time.monotonic() >= deadline:
                    raise StartupError(dst, address, str(e))
                time.sleep(TRANSPORT_SETTINGS['connect_retry_interval_seconds'])
        sock.settimeout(None)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._outgoing[dst] = sock
        self._send_locks[dst] = threading.Lock()
        logger.debug(f"rank {self.rank} connected to rank {dst} at {address[0]}:{address[1]}")
        return sock

    def connect_all(self):
        """Open every outgoing connection now instead of on first send."""
        for dst in range(self.world_size):
            if dst != self.rank:
                self._connection(dst)

    def _transmit(self, frame):
        if frame.dst == self.rank:
            self._put(frame)
            return
        sock = self._connection(frame.dst)
        try:
            with self._send_locks[frame.dst]:
                sock.sendall(frame.encode())
        except OSError as e:
            raise TransportError(f"rank {self.rank}: send to rank {frame.dst} failed: {str(e)}")

    def _collect(self, src, tag):
        with self._arrived:
            ready = self._arrived.wait_for(lambda: self.mailbox.has(src, tag) or self.closed,
                                           timeout=self.receive_timeout)
            if self.closed:
                raise TransportError(f"endpoint of rank {self.rank} closed while receiving")
            if not ready:
                logger.warning(f"rank {self.rank}: no frame from {src} tag {tag} after {self.receive_timeout}s")
                raise StarvedReceiveError(self.rank, src, tag, f"timed out after {self.receive_timeout}s")
            return self.mailbox.take(src, tag)

    def close(self):
        if self.closed:
            return
        super().close()
        with self._arrived:
            self._arrived.notify_all()
        for sock in list(self._outgoing.values()):
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            sock.close()
        if self._listener is not None:
            self._listener.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=1.0)
        for conn in self._incoming:
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            conn.close()


def connect_tcp(rank, hosts, eager=False, receive_timeout=None, connect_timeout=None):
    """
    Join a TCP mesh as `rank`. hosts[rank] is this process's listen address.
    With eager=True the full mesh is connected before returning; otherwise
    connections open on first send, and an unreachable peer surfaces then as
    StartupError naming its rank.
    """
    if not 0 <= rank < len(hosts):
        raise StartupError(rank, ('?', 0), f"rank outside hosts list of {len(hosts)} entries")
    endpoint = TcpEndpoint(rank, hosts, receive_timeout, connect_timeout)
    if eager:
        try:
            endpoint.connect_all()
        except StartupError:
            endpoint.close()
            raise
    return endpoint


def free_local_ports(count, host='127.0.0.1'):
    """Reserve-and-release `count` ephemeral ports on host."""
    sockets = []
    try:
        for _ in range(count):
            s = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            s.bind((host, 0))
            sockets.append(s)
        return [s.getsockname()[1] for s in sockets]
    finally:
        for s in sockets:
            s.close()


def launch_tcp_local(p, program, host='127.0.0.1', receive_timeout=None):
    """
    Loopback launcher: p ranks as threads of this process, each with its own
    TcpEndpoint on localhost. Used for cross-backend equivalence runs.
    """
    hosts = [(host, port) for port in free_local_ports(p, host)]
    endpoints = [connect_tcp(rank, hosts, receive_timeout=receive_timeout) for rank in range(p)]
    results = [NOTHING] * p
    errors = {}

    def body(rank):
        try:
            results[rank] = Maybe.of(program(endpoints[rank]))
        except Exception as e:
            logger.error(f"tcp rank {rank} failed: {type(e).__name__}: {str(e)}")
            errors[rank] = e

    threads = [threading.Thread(target=body, args=(rank,), name=f'dpd-tcp-rank-{rank}') for rank in range(p)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    ledgers = [ep.ledger.snapshot() for ep in endpoints]
    for ep in endpoints:
        ep.close()
    return LaunchOutcome(results=results, ledgers=ledgers, errors=errors)
