//! Target trajectory, bistatic delays and Doppler shifts for the first preset.

use mimo_motion::harness::{path_doppler, preset};
use mimo_motion::scene::{eval_position, path_delay};

fn main() {
    let s = preset("example1").unwrap();
    let g = &s.geometry;
    println!("{} transmitters, {} receivers, {} paths", g.tx_count(), g.rx_count(), g.path_count());
    for k in [0, 10, 25, 49] {
        let p = eval_position(&s.truth, &s.params, k);
        println!("k={k:2} t={:.2}s position ({:9.2}, {:7.2}) m", s.params.snapshot_time(k), p.x, p.y);
    }
    println!("\npath (m,n)   delay at k=0 (us)   Doppler at k=0 (Hz)");
    for i in 0..g.path_count() {
        let (m, n) = g.path_pair(i);
        let tau = path_delay(g, &s.truth, &s.params, m, n, 0);
        println!("({m},{n})        {:12.4}        {:10.3}", tau * 1e6, path_doppler(&s, m, n, 0.0));
    }
}
