use cyhunt::cyode::{frobenius_solve, hypergeometric_operator};
use cyhunt::mirror::MirrorData;
use cyhunt::numkernel::rat;

#[test]
fn bench_exact_chart() {
    let op = hypergeometric_operator(&rat(1, 2), &rat(1, 2), &rat(1024, 1));
    for order in [64usize, 96] {
        let t0 = std::time::Instant::now();
        let basis = frobenius_solve(&op, order);
        let t1 = t0.elapsed();
        let data = MirrorData::from_basis(&basis).unwrap().with_sign(-1);
        let t2 = t0.elapsed();
        println!(
            "order {order}: frobenius {:?}, chart total {:?}, t_q len {}",
            t1,
            t2,
            data.t_q.len()
        );
    }
}
