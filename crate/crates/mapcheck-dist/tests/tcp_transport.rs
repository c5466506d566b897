//! TCP mesh transport exercised over real loopback sockets, one thread per
//! worker endpoint.

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use mapcheck_core::corpus;
use mapcheck_dist::tcp::{model_fingerprint, run_tcp, TcpConfig, TcpRunOptions};
use mapcheck_dist::{run_sim, DistError, RunResult, SimOptions, Verdict};

/// Reserve `n` distinct loopback ports.
fn free_hosts(n: usize) -> Vec<String> {
    let listeners: Vec<TcpListener> = (0..n)
        .map(|_| TcpListener::bind("127.0.0.1:0").unwrap())
        .collect();
    listeners
        .iter()
        .map(|l| format!("127.0.0.1:{}", l.local_addr().unwrap().port()))
        .collect()
}

fn run_mesh(
    model_of: impl Fn() -> Box<dyn mapcheck_core::TransitionSystem> + Send + Sync,
    workers: usize,
    opts: &TcpRunOptions,
) -> Vec<Result<Verdict, DistError>> {
    let hosts = free_hosts(workers);
    let model0 = model_of();
    let hash = model_fingerprint(model0.as_ref());
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|idx| {
                let hosts = hosts.clone();
                let opts = opts.clone();
                let model = model_of();
                s.spawn(move || {
                    let mut cfg = TcpConfig::new(hosts, idx, hash);
                    cfg.connect_timeout = Duration::from_secs(10);
                    cfg.watchdog = Duration::from_secs(20);
                    run_tcp(model.as_ref(), &cfg, &opts)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

#[test]
fn two_processes_match_the_simulator_on_fig2() {
    let results = run_mesh(
        || Box::new(corpus::fig2_system()),
        2,
        &TcpRunOptions::default(),
    );
    let sim = run_sim(&corpus::fig2_system(), 2, 1, &SimOptions::default()).unwrap();
    for (idx, r) in results.iter().enumerate() {
        let v = r.as_ref().unwrap_or_else(|e| panic!("worker {idx}: {e}"));
        assert_eq!(v.result, sim.verdict.result);
        assert_eq!(v.iterations, sim.verdict.iterations);
    }
    // Worker 0 aggregates the global state count.
    assert_eq!(results[0].as_ref().unwrap().states, sim.verdict.states);
    assert_eq!(
        results[0].as_ref().unwrap().transitions,
        sim.verdict.transitions
    );
}

#[test]
fn three_workers_agree_on_a_no_cycle_model() {
    let results = run_mesh(
        || corpus::readers_writers(2, 2, false),
        3,
        &TcpRunOptions::default(),
    );
    let model = corpus::readers_writers(2, 2, false);
    let bfs = mapcheck_core::baselines::bfs_reach(model.as_ref(), 1 << 20).unwrap();
    for r in &results {
        let v = r.as_ref().unwrap();
        assert_eq!(v.result, RunResult::NoCycle);
        assert_eq!(v.iterations, 1);
    }
    assert_eq!(results[0].as_ref().unwrap().states, bfs.states);
}

#[test]
fn model_hash_mismatch_aborts_both_sides() {
    let hosts = free_hosts(2);
    let model_a = corpus::counter_cycle(3);
    let model_b = corpus::counter_cycle(4);
    let results: Vec<Result<Verdict, DistError>> = thread::scope(|s| {
        let h0 = {
            let hosts = hosts.clone();
            let model = model_a;
            s.spawn(move || {
                let mut cfg = TcpConfig::new(hosts, 0, model_fingerprint(model.as_ref()));
                cfg.connect_timeout = Duration::from_secs(10);
                run_tcp(model.as_ref(), &cfg, &TcpRunOptions::default())
            })
        };
        let h1 = {
            let hosts = hosts.clone();
            let model = model_b;
            s.spawn(move || {
                let mut cfg = TcpConfig::new(hosts, 1, model_fingerprint(model.as_ref()));
                cfg.connect_timeout = Duration::from_secs(10);
                run_tcp(model.as_ref(), &cfg, &TcpRunOptions::default())
            })
        };
        vec![h0.join().unwrap(), h1.join().unwrap()]
    });
    for (idx, r) in results.iter().enumerate() {
        match r {
            Err(DistError::Handshake(msg)) => {
                assert!(msg.contains("model hash"), "worker {idx}: {msg}")
            }
            // The side whose peer aborted first may see a closed socket
            // instead of completing its own handshake.
            Err(DistError::Transport(_)) => {}
            other => panic!("worker {idx}: expected abort, got {other:?}"),
        }
    }
}

#[test]
fn tcp_batch_sizes_agree() {
    for batch in [1usize, 64, 1024] {
        let results = run_mesh(
            || corpus::token_ring(3),
            2,
            &TcpRunOptions {
                batch_size: batch,
                ..TcpRunOptions::default()
            },
        );
        let v = results[0].as_ref().unwrap();
        assert!(matches!(v.result, RunResult::Cycle { .. }), "batch {batch}");
        assert_eq!(v.iterations, 1, "batch {batch}");
        assert_eq!(v.states, 6, "batch {batch}");
    }
}
