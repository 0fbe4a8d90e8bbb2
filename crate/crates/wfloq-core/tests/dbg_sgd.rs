use wfloq_core::encoding::sqoe_assign;
use wfloq_core::farm::presets::{load_preset, Preset};
use wfloq_core::optimize::{sgd_optimize_sqoe, CompiledProblem, OptimizerConfig};
use wfloq_core::solvers::brute_force;

#[test]
fn dbg_sgd_costs() {
    let compiled = CompiledProblem::compile(load_preset(Preset::WindfarmA, 4).unwrap()).unwrap();
    let target = brute_force(&compiled.qubo).unwrap();
    println!("target cost {} layout {}", target.best_cost, target.best_layout.to_bit_string());
    let sqoe = sqoe_assign(16, 8).unwrap();
    for seed in 0..16 {
        let run = sgd_optimize_sqoe(&compiled, &sqoe, &OptimizerConfig::default().with_seed(seed)).unwrap();
        println!(
            "seed {seed:2} best {:10.2} turbines {:2} iters {:4} gap {:8.2}",
            run.best_cost,
            run.turbine_count,
            run.iterations,
            run.best_cost - target.best_cost
        );
    }
}
