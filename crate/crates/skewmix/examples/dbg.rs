use nalgebra::{dvector, dmatrix};
use skewmix::mixture::*;
use skewmix::numerics::SpdMatrix;
use skewmix::skewdist::{sample_restricted, CanonicalRestrictedParams, Representation};

fn main() {
    let truth = CanonicalRestrictedParams::new(
        dvector![0.5, -0.5],
        SpdMatrix::new(dmatrix![1.2, 0.3; 0.3, 0.8]).unwrap(),
        dvector![0.0, 0.0],
        None,
    ).unwrap();
    let data = sample_restricted(&truth, 2000, Representation::Convolution, 5).unwrap().rows;
    let report = fit_em(&data, 1, Family::Rmsn, &FitOptions { max_iter: 2000, tol: 1e-9, ..Default::default() }).unwrap();
    println!("iters={} converged={}", report.iterations, report.converged);
    let t = &report.loglik_trace;
    for k in [0, 1, 2, 5, 10, 50, 100, 200, 500, 1000, t.len()-3, t.len()-2, t.len()-1] {
        if k < t.len() { println!("ll[{k}] = {:.9}", t[k]); }
    }
    let c = report.model.components()[0].as_restricted().unwrap();
    println!("mu = {:?}", c.mu().as_slice());
    println!("delta = {:?}", c.delta().as_slice());
}
