//! Bracket the dimension of a segment and of a Cantor set.

use nsreg::hausdorff::*;

fn main() -> nsreg::Result<()> {
    let lambdas: Vec<f64> = (1..=150).map(|i| i as f64 / 100.0).collect();
    let sqrt3 = 3f64.sqrt();

    let ladder: Vec<f64> = (2..=10).map(|j| sqrt3 * 2f64.powi(-j)).collect();
    let b = dimension_bracket(&PointSample::unit_segment(4097), &lambdas, &ladder, &PremeasureConfig::default())?;
    println!("segment: [{:?}, {:?}]", b.lambda_low, b.lambda_high);

    let ladder: Vec<f64> = (1..=7).map(|j| sqrt3 * 3f64.powi(-j)).collect();
    let b = dimension_bracket(&PointSample::cantor(8), &lambdas, &ladder, &PremeasureConfig::triadic())?;
    println!("cantor:  [{:?}, {:?}], log 2 / log 3 = {:.4}", b.lambda_low, b.lambda_high, 2f64.ln() / 3f64.ln());
    if let Some(why) = b.inconclusive {
        println!("inconclusive: {why}");
    }
    Ok(())
}
