use siadsim::metrics;
use siadsim::scenario::{FlowSpec, Scenario};

#[test]
#[ignore]
fn seed_scan_small_buffer() {
    for buf in [0.1, 0.3, 0.5] {
        for seed in [1u64, 2, 3] {
            let mut sc = Scenario::single_flow(10.0, buf, FlowSpec::siad_num_rtt(20));
            sc.seed = seed;
            let trace = siadsim::run(&sc).unwrap();
            let s = metrics::summarize(&trace);
            println!(
                "buf={buf} seed={seed} util={:.4} qfill={:.3} events={} maxmin={:?}",
                s.utilization,
                s.queue_fill,
                s.flows[0].congestion_events,
                s.max_epoch_queue_min
            );
        }
    }
}
