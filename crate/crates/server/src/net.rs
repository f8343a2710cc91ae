//! TCP transport. One thread owns the [`Session`] and ticks it; connection
//! tasks talk to it only through queues.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bytes::Bytes;
use futures::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc as tmpsc, watch};
use tokio_util::codec::{Framed, LengthDelimitedCodec};

use crate::protocol::{Message, PROTOCOL_VERSION};
use crate::session::Session;

pub const MAX_FRAME: usize = 1 << 20;
pub const DEFAULT_BROADCAST_HZ: f64 = 20.0;

pub fn codec() -> LengthDelimitedCodec {
    LengthDelimitedCodec::builder().max_frame_length(MAX_FRAME).new_codec()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServerOptions {
    /// State broadcasts per simulated second. Rounded to a whole number of ticks.
    pub broadcast_hz: f64,
    /// Simulated seconds per wall-clock second.
    pub speed: f64,
    /// Stop after this many loop iterations (ticks, or heartbeats while paused).
    pub max_loops: Option<u64>,
    /// Hold the loop until this many clients have connected.
    pub wait_for_clients: usize,
}

impl Default for ServerOptions {
    fn default() -> Self {
        Self { broadcast_hz: DEFAULT_BROADCAST_HZ, speed: 1.0, max_loops: None, wait_for_clients: 0 }
    }
}

enum Inbound {
    Connected,
    Disconnected,
    Message(Message, tmpsc::UnboundedSender<Bytes>),
}

pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    sim: std::thread::JoinHandle<Session>,
    accept: tokio::task::JoinHandle<()>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stop the loop and return the final session.
    pub async fn stop(self) -> Session {
        self.shutdown.store(true, Ordering::SeqCst);
        self.finished().await
    }

    /// Wait for the loop to end on its own (see [`ServerOptions::max_loops`]).
    pub async fn finished(self) -> Session {
        let session = tokio::task::spawn_blocking(move || self.sim.join().expect("simulation thread panicked")).await.expect("join task");
        self.accept.abort();
        session
    }
}

/// Start serving `session` on `listener`. Must be called inside a tokio runtime.
pub fn start(listener: TcpListener, session: Session, opts: ServerOptions) -> std::io::Result<ServerHandle> {
    if !(opts.broadcast_hz > 0.0 && opts.speed > 0.0) {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "broadcast rate and speed must be > 0"));
    }
    let addr = listener.local_addr()?;
    let (inbound_tx, inbound_rx) = mpsc::channel::<Inbound>();
    let (state_tx, state_rx) = watch::channel(session.snapshot().encode());
    let shutdown = Arc::new(AtomicBool::new(false));

    let accept = tokio::spawn(async move {
        while let Ok((stream, _)) = listener.accept().await {
            let _ = stream.set_nodelay(true);
            tokio::spawn(connection(stream, inbound_tx.clone(), state_rx.clone()));
        }
    });

    let stop = shutdown.clone();
    let sim = std::thread::spawn(move || sim_loop(session, opts, inbound_rx, state_tx, stop));
    Ok(ServerHandle { addr, shutdown, sim, accept })
}

fn dispatch(session: &mut Session, clients: &mut usize, event: Inbound) {
    match event {
        Inbound::Connected => *clients += 1,
        Inbound::Disconnected => *clients = clients.saturating_sub(1),
        Inbound::Message(msg, reply) => {
            if let Some(r) = session.handle_message(msg) {
                let _ = reply.send(r.encode());
            }
        }
    }
}

fn sim_loop(
    mut session: Session,
    opts: ServerOptions,
    inbound: mpsc::Receiver<Inbound>,
    state: watch::Sender<Bytes>,
    shutdown: Arc<AtomicBool>,
) -> Session {
    let dt = session.config().dt;
    let period = Duration::from_secs_f64(dt / opts.speed);
    let every = ((1.0 / opts.broadcast_hz) / dt).round().max(1.0) as u64;
    let mut clients = 0usize;
    while clients < opts.wait_for_clients && !shutdown.load(Ordering::SeqCst) {
        match inbound.recv_timeout(Duration::from_millis(20)) {
            Ok(event) => dispatch(&mut session, &mut clients, event),
            Err(mpsc::RecvTimeoutError::Timeout) => {}
            Err(mpsc::RecvTimeoutError::Disconnected) => return session,
        }
    }
    let mut loops = 0u64;
    let mut next = Instant::now();
    while !shutdown.load(Ordering::SeqCst) && opts.max_loops.is_none_or(|m| loops < m) {
        while let Ok(event) = inbound.try_recv() {
            dispatch(&mut session, &mut clients, event);
        }
        session.set_clients(clients);
        if let Err(e) = session.tick() {
            state.send_replace(Message::error(format!("simulation stopped: {e}")).encode());
            session.handle_message(Message::Pause { v: PROTOCOL_VERSION });
        }
        loops += 1;
        if loops.is_multiple_of(every) {
            state.send_replace(session.snapshot().encode());
        }
        next += period;
        match next.checked_duration_since(Instant::now()) {
            Some(wait) => std::thread::sleep(wait),
            None => next = Instant::now(),
        }
    }
    session
}

async fn connection(stream: TcpStream, inbound: mpsc::Sender<Inbound>, mut state: watch::Receiver<Bytes>) {
    let (mut sink, mut source) = Framed::new(stream, codec()).split();
    let (reply_tx, mut reply_rx) = tmpsc::unbounded_channel::<Bytes>();
    let _ = inbound.send(Inbound::Connected);
    state.borrow_and_update();
    loop {
        tokio::select! {
            frame = source.next() => match frame {
                Some(Ok(payload)) => match Message::decode(&payload) {
                    Ok(msg) => {
                        if inbound.send(Inbound::Message(msg, reply_tx.clone())).is_err() {
                            break;
                        }
                    }
                    Err(reason) => {
                        let _ = reply_tx.send(Message::error(reason).encode());
                    }
                },
                _ => break,
            },
            changed = state.changed() => {
                if changed.is_err() {
                    break;
                }
                let latest = state.borrow_and_update().clone();
                if sink.send(latest).await.is_err() {
                    break;
                }
            },
            Some(reply) = reply_rx.recv() => {
                if sink.send(reply).await.is_err() {
                    break;
                }
            },
        }
    }
    let _ = inbound.send(Inbound::Disconnected);
}

/// Minimal scripted client.
pub struct Client {
    framed: Framed<TcpStream, LengthDelimitedCodec>,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> std::io::Result<Self> {
        let stream = TcpStream::connect(addr).await?;
        stream.set_nodelay(true)?;
        Ok(Self { framed: Framed::new(stream, codec()) })
    }

    pub async fn send(&mut self, msg: &Message) -> std::io::Result<()> {
        self.framed.send(msg.encode()).await
    }

    pub async fn send_raw(&mut self, payload: &[u8]) -> std::io::Result<()> {
        self.framed.send(Bytes::copy_from_slice(payload)).await
    }

    /// Next message, or `None` once the server closes the connection.
    pub async fn recv(&mut self) -> Option<Result<Message, String>> {
        match self.framed.next().await? {
            Ok(payload) => Some(Message::decode(&payload)),
            Err(e) => Some(Err(e.to_string())),
        }
    }
}
