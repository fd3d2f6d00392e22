//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line. Run with
//! `cargo test -p qproc --test acceptance -- --nocapture`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use qproc::channels::{
    amplitude_damping, bell_basis, choi_from_kraus, depolarizing, identity_channel, pauli_channel,
    rotation_matrix, rotation_unitary, unitary_choi, KrausChannel, PauliAxis,
};
use qproc::costs::{infidelity_cost, smooth_trace_cost, trace_cost, CostFunction, CostKind};
use qproc::linalg::{
    c, frobenius_norm, hermitize, hs_inner, identity, kron, trace_norm, CMatrix, CVector,
};
use qproc::optim::{
    frank_wolfe, project_to_states, projected_subgradient, simplex_project, unitary_optimal_program,
    OptimizerConfig, Schedule,
};
use qproc::processors::{
    ad_stinespring_unitary, basis_program_index, choi_power_program, pbt_processor,
    pbt_reduced_processor, pqc_ad_default, pqc_processor, stinespring_choi, teleportation_processor,
};
use qproc::random::SeededRng;
use qproc::sdp::{diamond_distance, optimal_program_sdp, ProgramConstraint};
use qproc::states::{DensityOperator, HermitianOperator};

fn criterion(number: usize, label: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => println!("acceptance {number:02} PASS ({secs:6.2}s) — {label}"),
        Err(e) => {
            println!("acceptance {number:02} FAIL ({secs:6.2}s) — {label}");
            std::panic::resume_unwind(e);
        }
    }
}

#[test]
fn acceptance_01_pauli_perfection() {
    criterion(1, "teleportation simulates a random Pauli channel to C1 <= 1e-4", || {
        let started = Instant::now();
        let mut rng = SeededRng::new(42);
        let probs = rng.simplex_point(4);
        let proc = Arc::new(teleportation_processor(2).unwrap());
        let target = choi_from_kraus(&pauli_channel(&probs).unwrap()).unwrap();
        let cost = trace_cost(proc, target).unwrap();
        let init = DensityOperator::maximally_mixed(4);
        let cfg = OptimizerConfig {
            iterations: 500,
            schedule: Schedule::Geometric { a0: 0.08, rho: 0.98 },
            ..Default::default()
        };
        let trace = projected_subgradient(&cost, &init, &cfg).unwrap();
        assert!(trace.best_cost <= 1e-4, "best C1 = {}", trace.best_cost);
        assert!(started.elapsed().as_secs_f64() < 10.0);
    });
}

/// Fine scan of C1 over the Bell-diagonal image of the teleportation
/// processor (grid plus coordinate refinement).
fn teleport_scan_oracle(target: &CMatrix) -> f64 {
    let basis = bell_basis(2).unwrap();
    let projs: Vec<CMatrix> = basis.iter().map(|v| v * v.adjoint()).collect();
    let eval = |q: &[f64]| -> f64 {
        let mut m = target.clone().scale(-1.0);
        for (w, p) in q.iter().zip(&projs) {
            m += p.scale(*w);
        }
        trace_norm(&hermitize(&m)).unwrap()
    };
    let steps = 20usize;
    let mut best = f64::INFINITY;
    let mut best_q = vec![0.25; 4];
    for a in 0..=steps {
        for b in 0..=steps - a {
            for cc in 0..=steps - a - b {
                let d = steps - a - b - cc;
                let q = [a, b, cc, d].map(|v| v as f64 / steps as f64);
                let v = eval(&q);
                if v < best {
                    best = v;
                    best_q = q.to_vec();
                }
            }
        }
    }
    let mut step = 1.0 / steps as f64;
    for _ in 0..80 {
        let mut improved = false;
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let mut q = best_q.clone();
                let delta = step.min(q[j]);
                q[i] += delta;
                q[j] -= delta;
                let v = eval(&q);
                if v < best - 1e-15 {
                    best = v;
                    best_q = q;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-10 {
                break;
            }
        }
    }
    best
}

#[test]
fn acceptance_02_teleportation_covariant_unitary() {
    criterion(2, "rotation targets: covariant converges, generic plateaus at the scan optimum", || {
        let started = Instant::now();
        let proc = Arc::new(teleportation_processor(2).unwrap());
        let init = DensityOperator::maximally_mixed(4);

        let u = rotation_matrix(std::f64::consts::FRAC_PI_2, PauliAxis::X);
        let cost = trace_cost(proc.clone(), unitary_choi(&u).unwrap()).unwrap();
        let cfg = OptimizerConfig { iterations: 500, ..Default::default() };
        let trace = projected_subgradient(&cost, &init, &cfg).unwrap();
        assert!(trace.best_cost <= 1e-3, "R(pi/2) best C1 = {}", trace.best_cost);

        let u = rotation_matrix(std::f64::consts::FRAC_PI_4, PauliAxis::X);
        let target = unitary_choi(&u).unwrap();
        let oracle = teleport_scan_oracle(target.matrix());
        let cost = trace_cost(proc, target).unwrap();
        let trace = projected_subgradient(&cost, &init, &cfg).unwrap();
        assert!(
            (trace.best_cost - oracle).abs() <= 1e-2,
            "R(pi/4): plateau {} vs oracle {oracle}",
            trace.best_cost
        );
        assert!(started.elapsed().as_secs_f64() < 30.0);
    });
}

#[test]
fn acceptance_03_gradient_correctness() {
    criterion(3, "analytic gradients match central finite differences on all processors", || {
        let started = Instant::now();
        let mut rng = SeededRng::new(303);
        let processors: Vec<Arc<qproc::processors::ProcessorMap>> = vec![
            Arc::new(teleportation_processor(2).unwrap()),
            Arc::new(pbt_processor(2, 2).unwrap()),
            Arc::new(pqc_processor(&pqc_ad_default(0.0).unwrap().with_registers(2).unwrap()).unwrap()),
        ];
        for proc in processors {
            let target = rng.choi(2);
            for kind in [CostKind::Infidelity, CostKind::SmoothTrace { mu: 1e-2 }] {
                let cost = CostFunction::new(proc.clone(), target.clone(), kind).unwrap();
                let dim = proc.program_dim();
                for _ in 0..10 {
                    let pi = rng.density(dim);
                    let g = cost.grad(&pi).unwrap();
                    let h = 1e-5;
                    for _ in 0..3 {
                        let mut dir = rng.hermitian(dim);
                        let tr = qproc::linalg::trace(&dir).re / dim as f64;
                        dir -= identity(dim).scale(tr);
                        dir = dir.scale(1.0 / frobenius_norm(&dir));
                        let plus = cost.eval_herm(&(pi.matrix() + dir.scale(h))).unwrap();
                        let minus = cost.eval_herm(&(pi.matrix() - dir.scale(h))).unwrap();
                        let fd = (plus - minus) / (2.0 * h);
                        let an = hs_inner(&g, &dir);
                        let rel = (fd - an).abs() / fd.abs().max(1e-8);
                        assert!(
                            rel <= 1e-5,
                            "{} on {}: fd {fd} vs analytic {an}",
                            kind.name(),
                            proc.label()
                        );
                    }
                }
            }
        }
        assert!(started.elapsed().as_secs_f64() < 60.0);
    });
}

#[test]
fn acceptance_04_sandwich_relation() {
    criterion(4, "C1 <= C_diamond <= d*C1 on 30 random instances", || {
        let started = Instant::now();
        let mut rng = SeededRng::new(404);
        let processors: Vec<Arc<qproc::processors::ProcessorMap>> = vec![
            Arc::new(teleportation_processor(2).unwrap()),
            Arc::new(pbt_reduced_processor(2, 2).unwrap()),
            Arc::new(pqc_processor(&pqc_ad_default(0.0).unwrap().with_registers(2).unwrap()).unwrap()),
        ];
        for k in 0..30 {
            let proc = &processors[k % processors.len()];
            let target = rng.choi(2);
            let pi = rng.density(proc.program_dim());
            let chi_pi = hermitize(&proc.apply_raw(pi.matrix()).unwrap());
            let delta = HermitianOperator::new(target.matrix() - &chi_pi).unwrap();
            let c1 = trace_norm(delta.matrix()).unwrap();
            let diamond = diamond_distance(&delta, 2, 1e-6).unwrap().objective;
            assert!(c1 <= diamond + 1e-6, "instance {k}: C1 {c1} > C_dia {diamond}");
            assert!(diamond <= 2.0 * c1 + 1e-6, "instance {k}: C_dia {diamond} > 2*C1");
        }
        assert!(started.elapsed().as_secs_f64() < 300.0);
    });
}

#[test]
fn acceptance_05_huber_bounds() {
    criterion(5, "C_mu <= C1 <= C_mu + mu*dim/2 on 50 random instances per mu", || {
        let mut rng = SeededRng::new(505);
        let proc = Arc::new(teleportation_processor(2).unwrap());
        for mu in [1e-1, 1e-2, 1e-3] {
            for _ in 0..50 {
                let target = rng.choi(2);
                let pi = rng.density(4);
                let c1 = trace_cost(proc.clone(), target.clone()).unwrap().eval(&pi).unwrap();
                let cmu = smooth_trace_cost(proc.clone(), target, mu).unwrap().eval(&pi).unwrap();
                assert!(cmu <= c1 + 1e-9, "mu={mu}: C_mu {cmu} > C1 {c1}");
                assert!(c1 <= cmu + mu * 4.0 / 2.0 + 1e-9, "mu={mu}: sandwich upper violated");
            }
        }
    });
}

#[test]
fn acceptance_06_projection_exactness() {
    criterion(6, "state projection matches the brute-force oracle; simplex output is normalized", || {
        let mut rng = SeededRng::new(606);
        for dim in 2..=4usize {
            for _ in 0..20 {
                let h = HermitianOperator::new(rng.hermitian(dim)).unwrap();
                let fast = project_to_states(&h);
                // Brute-force: enumerate eigenvalue supports (KKT).
                let eig = h.eig();
                let x: Vec<f64> = eig.eigenvalues.iter().copied().collect();
                let mut best: Option<(f64, Vec<f64>)> = None;
                for mask in 1u32..(1 << dim) {
                    let support: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
                    let s: f64 = support.iter().map(|&i| x[i]).sum();
                    let theta = (s - 1.0) / support.len() as f64;
                    let mut lam = vec![0.0; dim];
                    let mut ok = true;
                    for i in 0..dim {
                        if support.contains(&i) {
                            lam[i] = x[i] - theta;
                            if lam[i] < -1e-12 {
                                ok = false;
                            }
                        } else if x[i] - theta > 1e-12 {
                            ok = false;
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let dist: f64 = lam.iter().zip(&x).map(|(l, v)| (l - v) * (l - v)).sum();
                    if best.as_ref().map_or(true, |(d, _)| dist < *d) {
                        best = Some((dist, lam));
                    }
                }
                let lam = best.unwrap().1;
                let mut oracle = CMatrix::zeros(dim, dim);
                for (k, &p) in lam.iter().enumerate() {
                    let col = eig.eigenvectors.column(k);
                    oracle += (col * col.adjoint()).scale(p);
                }
                assert!(frobenius_norm(&(fast.matrix() - oracle)) <= 1e-8);
            }
        }
        for _ in 0..200 {
            let n = 2 + (rng.uniform(0.0, 5.0) as usize);
            let x: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
            let p = simplex_project(&x);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-10, "trace {sum}");
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    });
}

#[test]
fn acceptance_07_pbt_identity_scaling() {
    criterion(7, "reduced-PBT identity error <= 4/N and non-increasing, N = 2..6", || {
        let started = Instant::now();
        let chi_id = choi_from_kraus(&identity_channel(2).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for n in 2..=6usize {
            let proc = pbt_reduced_processor(n, 2).unwrap();
            let sol = optimal_program_sdp(&proc, &chi_id, 1e-6, ProgramConstraint::ChoiSet).unwrap();
            let bound = 4.0 / n as f64;
            assert!(sol.objective <= bound + 1e-6, "N={n}: {} > {bound}", sol.objective);
            assert!(sol.objective <= prev + 1e-6, "N={n}: not monotone");
            prev = sol.objective;
        }
        assert!(started.elapsed().as_secs_f64() < 600.0);
    });
}

#[test]
fn acceptance_08_optimized_beats_choi_program() {
    criterion(8, "optimized programs beat the tensor-power Choi program for damping targets", || {
        for n in [2usize, 3] {
            let proc = Arc::new(pbt_processor(n, 2).unwrap());
            for p in [0.25, 0.5, 0.75] {
                let target = choi_from_kraus(&amplitude_damping(p).unwrap()).unwrap();
                let choi_prog = choi_power_program(&target, n).unwrap();
                let cost = trace_cost(proc.clone(), target).unwrap();
                let baseline = cost.eval(&choi_prog).unwrap();
                let cfg = OptimizerConfig {
                    iterations: 200,
                    schedule: Schedule::Geometric { a0: 0.08, rho: 0.97 },
                    ..Default::default()
                };
                let trace = projected_subgradient(&cost, &choi_prog, &cfg).unwrap();
                assert!(
                    trace.best_cost <= baseline + 1e-12,
                    "N={n} p={p}: {} > {baseline}",
                    trace.best_cost
                );
                if (p - 0.5).abs() < 1e-12 {
                    assert!(
                        baseline - trace.best_cost >= 1e-3,
                        "N={n} p=0.5: improvement only {}",
                        baseline - trace.best_cost
                    );
                }
            }
        }
    });
}

#[test]
fn acceptance_09_unitary_closed_form_and_rate() {
    criterion(9, "Frank-Wolfe contracts at 2/(k+k^2) to the closed-form optimal program", || {
        let proc = Arc::new(teleportation_processor(2).unwrap());
        let u = rotation_matrix(std::f64::consts::FRAC_PI_4, PauliAxis::X);
        let cost = infidelity_cost(proc.clone(), unitary_choi(&u).unwrap()).unwrap();
        let init = DensityOperator::maximally_mixed(4);
        let cfg = OptimizerConfig {
            iterations: 3000,
            schedule: Schedule::FwClassic,
            keep_iterates: true,
            ..Default::default()
        };
        let trace = frank_wolfe(&cost, &init, &cfg).unwrap();
        let (opt, _f) = unitary_optimal_program(&proc, &u).unwrap();
        let mut consts = Vec::new();
        for k in 5..=100usize {
            let d = trace_norm(&hermitize(&(trace.iterates[k - 1].matrix() - opt.matrix()))).unwrap();
            consts.push(d * (k as f64 + (k * k) as f64) / 2.0);
        }
        let cmax = consts.iter().cloned().fold(f64::MIN, f64::max);
        let cmin = consts.iter().cloned().fold(f64::MAX, f64::min);
        assert!((cmax - cmin) / cmax <= 0.05, "rate constant varies: {cmin}..{cmax}");
        let last = trace.iterates.last().unwrap();
        let dist = trace_norm(&hermitize(&(last.matrix() - opt.matrix()))).unwrap();
        assert!(dist <= 1e-6, "limit misses closed form by {dist}");
    });
}

#[test]
fn acceptance_10_pbt_unitary_flatness() {
    criterion(10, "optimized C1 for rotation targets on two-port PBT is angle-independent", || {
        let proc = Arc::new(pbt_processor(2, 2).unwrap());
        let init = DensityOperator::maximally_mixed(16);
        let mut values = Vec::new();
        for theta in [0.0, std::f64::consts::PI / 8.0, std::f64::consts::FRAC_PI_4] {
            let u = rotation_matrix(theta, PauliAxis::X);
            let cost = trace_cost(proc.clone(), unitary_choi(&u).unwrap()).unwrap();
            let cfg = OptimizerConfig {
                iterations: 800,
                schedule: Schedule::Geometric { a0: 0.1, rho: 0.99 },
                ..Default::default()
            };
            let trace = projected_subgradient(&cost, &init, &cfg).unwrap();
            values.push(trace.best_cost);
        }
        for a in &values {
            for b in &values {
                assert!((a - b).abs() <= 2e-3, "flatness violated: {values:?}");
            }
        }
    });
}

fn output_distance(a: &KrausChannel, b: &KrausChannel, phi: &CVector) -> f64 {
    let d = a.d_in();
    let rho = phi * phi.adjoint();
    let mut out = CMatrix::zeros(d * a.d_out(), d * a.d_out());
    for op in a.kraus_ops() {
        let big = kron(&identity(d), op);
        out += &big * &rho * big.adjoint();
    }
    for op in b.kraus_ops() {
        let big = kron(&identity(d), op);
        out -= &big * &rho * big.adjoint();
    }
    trace_norm(&hermitize(&out)).unwrap()
}

fn diamond_input_oracle(a: &KrausChannel, b: &KrausChannel, seed: u64) -> f64 {
    let d = a.d_in();
    let mut rng = SeededRng::new(seed);
    let mut best_phi = rng.pure_state(d * d);
    let mut best = output_distance(a, b, &best_phi);
    for _ in 0..800 {
        let phi = rng.pure_state(d * d);
        let v = output_distance(a, b, &phi);
        if v > best {
            best = v;
            best_phi = phi;
        }
    }
    let mut step = 0.3;
    for _ in 0..2500 {
        let mut cand = best_phi.clone();
        cand += rng.pure_state(d * d).scale(step);
        let cand = cand.scale(1.0 / cand.norm());
        let v = output_distance(a, b, &cand);
        if v > best {
            best = v;
            best_phi = cand;
        } else {
            step *= 0.999;
        }
    }
    best
}

#[test]
fn acceptance_11_diamond_oracle_agreement() {
    criterion(11, "diamond SDP matches the pure-input maximization oracle", || {
        let started = Instant::now();
        let idc = identity_channel(2).unwrap();
        let dep = depolarizing(0.4, 2).unwrap();
        let chi_a = choi_from_kraus(&idc).unwrap();
        let chi_b = choi_from_kraus(&dep).unwrap();
        let omega = HermitianOperator::new(chi_a.matrix() - chi_b.matrix()).unwrap();
        let sdp = diamond_distance(&omega, 2, 1e-7).unwrap().objective;
        assert!((sdp - 0.600).abs() <= 1e-4, "depolarizing: {sdp}");
        let oracle = diamond_input_oracle(&idc, &dep, 77);
        assert!((oracle - 0.600).abs() <= 2e-3 && sdp >= oracle - 1e-3);

        let rot = rotation_unitary(std::f64::consts::FRAC_PI_4, PauliAxis::Z).unwrap();
        let chi_r = choi_from_kraus(&rot).unwrap();
        let omega = HermitianOperator::new(chi_a.matrix() - chi_r.matrix()).unwrap();
        let sdp = diamond_distance(&omega, 2, 1e-7).unwrap().objective;
        assert!((sdp - 1.41421).abs() <= 1e-3, "rotation: {sdp}");
        let oracle = diamond_input_oracle(&idc, &rot, 78);
        assert!((oracle - 1.41421).abs() <= 2e-3 && sdp >= oracle - 1e-3);
        assert!(started.elapsed().as_secs_f64() < 60.0);
    });
}

#[test]
fn acceptance_12_pqc_consistency() {
    criterion(12, "PQC basis programs compose dilations; the exact generator reproduces damping", || {
        let spec = pqc_ad_default(0.5).unwrap().with_registers(3).unwrap();
        let proc = pqc_processor(&spec).unwrap();
        let u0 = qproc::linalg::unitary_exp(spec.h0.matrix(), spec.t0).unwrap();
        let u1 = qproc::linalg::unitary_exp(spec.h1.matrix(), spec.t1).unwrap();
        let mut rng = SeededRng::new(1212);
        for _ in 0..10 {
            let bits: Vec<usize> = (0..3).map(|_| (rng.uniform(0.0, 2.0) as usize) & 1).collect();
            let theta_bit = (rng.uniform(0.0, 2.0) as usize) & 1;
            let idx = basis_program_index(&spec, theta_bit, &bits).unwrap();
            let mut prog = CMatrix::zeros(16, 16);
            prog[(idx, idx)] = c(1.0, 0.0);
            let pi = DensityOperator::new(prog).unwrap();
            let chi = proc.apply(&pi).unwrap();
            let mut u = identity(4);
            for &b in &bits {
                u = if b == 0 { &u0 * u } else { &u1 * u };
            }
            let mut theta = CVector::zeros(2);
            theta[theta_bit] = c(1.0, 0.0);
            let expect = stinespring_choi(&u, &theta).unwrap();
            assert!(frobenius_norm(&(chi.matrix() - expect.matrix())) <= 1e-10);
        }
        let mut theta0 = CVector::zeros(2);
        theta0[0] = c(1.0, 0.0);
        for p in [0.1, 0.5, 0.9] {
            let u = ad_stinespring_unitary(p).unwrap();
            let chi = stinespring_choi(&u, &theta0).unwrap();
            let target = choi_from_kraus(&amplitude_damping(p).unwrap()).unwrap();
            assert!(frobenius_norm(&(chi.matrix() - target.matrix())) <= 1e-10, "p={p}");
        }
    });
}

#[test]
fn acceptance_13_pqc_depolarizing_coverage() {
    criterion(13, "four-register PQC simulates every depolarizing channel to C1 <= 0.1", || {
        let started = Instant::now();
        let spec = pqc_ad_default(0.0).unwrap();
        let proc = Arc::new(pqc_processor(&spec).unwrap());
        let init = DensityOperator::maximally_mixed(32);
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let target = choi_from_kraus(&depolarizing(p, 2).unwrap()).unwrap();
            let cost = trace_cost(proc.clone(), target).unwrap();
            let cfg = OptimizerConfig {
                iterations: 500,
                schedule: Schedule::Geometric { a0: 0.15, rho: 0.99 },
                ..Default::default()
            };
            let trace = projected_subgradient(&cost, &init, &cfg).unwrap();
            assert!(trace.best_cost <= 0.1, "p={p}: best C1 = {}", trace.best_cost);
        }
        assert!(started.elapsed().as_secs_f64() < 900.0);
    });
}
