use gibbs_ineq::fidelity::fidelity_report;
use gibbs_ineq::inequalities::{check_harris, DEFAULT_TOL};
use gibbs_ineq::models::single_spin;
use gibbs_ineq::spectral::decompose;

fn main() -> gibbs_ineq::Result<()> {
    let pair = single_spin(2.0)?;
    let beta = 1.0;

    let ens = decompose(&pair.t, beta)?;
    let s = ens.to_eigenbasis(pair.s.matrix())?;
    let harris = check_harris(&s, &ens, DEFAULT_TOL)?;
    println!(
        "harris: {:.6} <= {:.6} <= {:.6}  pass={}",
        harris.lhs,
        harris.mid.unwrap(),
        harris.rhs,
        harris.pass
    );

    let r = fidelity_report(&pair.t, &pair.s, beta, 0.0)?;
    println!(
        "chi_F = {:.6}  bounds = ({:.6}, {:.6})",
        r.chi(),
        r.bound_lower.unwrap(),
        r.bound_upper.unwrap()
    );
    Ok(())
}
