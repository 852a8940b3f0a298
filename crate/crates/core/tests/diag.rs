use siadsim::metrics;
use siadsim::scenario::{FlowSpec, Scenario};

#[test]
#[ignore]
fn small_buffer_diag() {
    for buf in [0.1, 0.3] {
        let mut sc = Scenario::single_flow(10.0, buf, FlowSpec::siad_num_rtt(20));
        sc.horizon_s = 120.0;
        let trace = siadsim::run(&sc).unwrap();
        let s = metrics::summarize(&trace);
        let f = &trace.flows[0];
        println!(
            "== buf={buf} util={:.4} qfill={:.3} events={} timeouts={} drops={} retx={}",
            s.utilization,
            s.queue_fill,
            s.flows[0].congestion_events,
            f.totals.timeouts,
            f.totals.dropped(),
            f.totals.retransmits
        );
        let mut last = 20.0;
        for e in f.cc_events.iter().filter(|e| e.time > 20.0 && e.time < 35.0) {
            let drops = f
                .drops
                .iter()
                .filter(|d| d.time > last && d.time <= e.time)
                .count();
            println!(
                "  ev t={:7.3} gap={:5.2} {:6.1}->{:6.1} beta={:?} to={} drops={}",
                e.time,
                e.time - last,
                e.cwnd_before,
                e.cwnd_after,
                e.beta.map(|b| (b * 1000.0).round() / 1000.0),
                e.timeout,
                drops
            );
            last = e.time;
        }
        // cwnd + queue around one epoch
        for i in (trace.index_at(24.0)..trace.index_at(30.0)).step_by(25) {
            println!(
                "  t={:6.2} cwnd={:7.2} q={:3.0} qmin={:3.0} rttmin={:.4}",
                trace.time_at(i),
                f.series.cwnd[i],
                trace.queue.occupancy[i],
                trace.queue.min_occupancy[i],
                f.series.rtt_min[i]
            );
        }
    }
}
