#[test]
fn dbg() {
    let rho: f64 = 2.0 / 3.0;
    println!("rho bits        {:016x}  {rho:.17e}", rho.to_bits());
    let t = rho;
    let psi = 0.5 * 1.0 * t * t - t;
    let dpsi = 1.0 * t - 1.0;
    println!("psi  bits       {:016x}  {psi:.17e}", psi.to_bits());
    println!("dpsi bits       {:016x}  {dpsi:.17e}", dpsi.to_bits());
    // linearize: q = f - M*x
    let mx = dpsi * t;
    let q = psi - mx;
    println!("mx   bits       {:016x}  {mx:.17e}", mx.to_bits());
    println!("q    bits       {:016x}  {q:.17e}", q.to_bits());
    // solve with hint anchoring
    let mh = dpsi * t + q; // matvec(hint) + q
    let rhs = -mh;
    let delta = rhs / dpsi;
    let z = t + delta;
    println!("mh   bits       {:016x}  {mh:.17e}", mh.to_bits());
    println!("delta           {:016x}  {delta:.17e}", delta.to_bits());
    println!("z               {:016x}  {z:.17e}", z.to_bits());
    println!("-(rho) bits     {:016x}  {:.17e}", (-rho).to_bits(), -rho);
    // direct newton for comparison
    let direct = t - psi / dpsi;
    println!("direct x-psi/dpsi  {:.17e} bits {:016x}", direct, direct.to_bits());
    let ratio = psi / dpsi;
    println!("psi/dpsi = {:.17e} vs 2rho = {:.17e}", ratio, 2.0 * rho);
}
