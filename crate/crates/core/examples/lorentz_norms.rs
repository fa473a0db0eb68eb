//! Lorentz quasinorms of a simple function and of sampled data.

use nsreg::lorentz::*;

fn main() -> nsreg::Result<()> {
    let f = SimpleFunction::new(vec![(4.0, 0.1), (2.0, 0.5), (1.0, 2.0)])?;
    for (p, q) in [(2.0, 2.0), (2.0, 1.0), (2.0, f64::INFINITY), (3.0, 6.0)] {
        let n = f.lorentz_quasinorm(p, q)?;
        println!("L^({p}, {q}) = {:.6} via {:?}", n.value, n.method);
    }
    let check = interpolate_bound(&f, 1.5, 3.0, 6.0)?;
    println!(
        "interpolation: lhs {:.4} <= rhs {:.4} (ratio {:.3}, pass {})",
        check.lhs, check.rhs, check.ratio, check.pass
    );

    // the same function, sampled on cells of measure 0.1
    let mut values = vec![4.0];
    values.extend(std::iter::repeat_n(2.0, 5));
    values.extend(std::iter::repeat_n(1.0, 20));
    let s = Samples::new(values, 0.1)?;
    println!("sampled L^(2, 1) = {:.6}", s.lorentz_quasinorm(2.0, 1.0)?.value);
    Ok(())
}
