use singflow_core::census::{birkhoff_ode, census_context, ObservableSet};
use singflow_core::zoo::{zoo_entry, ModelPayload};

fn main() {
    let entry = zoo_entry("glued_suspension_1").unwrap();
    let ModelPayload::Ode(f) = &entry.payload else { panic!() };
    let ctx = census_context(&entry);
    println!("singularities: {}", ctx.singularities.len());
    let obs = ObservableSet::for_entry(&entry, &ctx.singularities);
    println!("scales: {:?} {:?}", obs.names, obs.scales);
    for seed in [[0.2, 0.5, 0.3], [-0.8, -0.3, 0.7], [1.2, 0.1, 0.0], [0.52, 0.01, 0.9]] {
        let v = birkhoff_ode(f.as_ref(), &entry.trapping, seed, &obs, 600.0, 60.0, &[], 0.1);
        println!(
            "seed {:?}: gap={:.5} discard={} exited={} avgs={:?}",
            seed, v.convergence_gap, v.discard, v.exited,
            v.averages.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }
}
