use polymer_endpoint::dist::*;

fn main() {
    let cfg = NumericsConfig::default();
    let t0 = std::time::Instant::now();
    let gue = f_gue(0.0, &cfg).unwrap();
    println!("F_GUE(0)  = {:.15} (delta {:.2e}, n {}->{})  [want 0.969372828355...]", gue.value, gue.delta, gue.n_coarse, gue.n_fine);
    let goe = f_goe(0.0, &cfg).unwrap();
    println!("F_GOE(0)  = {:.15} (delta {:.2e})  [want 0.831908066202...]", goe.value, goe.delta);
    let jt = joint_density(0.5, 0.5, &cfg, JointRoute::Trace).unwrap();
    let jd = joint_density(0.5, 0.5, &cfg, JointRoute::DetDifference).unwrap();
    println!("f(0.5,0.5) trace = {:.12} detdiff = {:.12}  [want 0.066416341333]", jt, jd);
    let fe = endpoint_density(0.0, &cfg).unwrap();
    println!("f_end(0)  = {:.12}  [want 0.78304878...]", fe);
    println!("-- elapsed {:?}", t0.elapsed());
    let sup = one_sided_sup_cdf(1.0, 4.0, &cfg).unwrap();
    println!("sup(1,4)  = {:.15} (delta {:.2e})  [want 0.9999992173141212]", sup.value, sup.delta);
    let sc = joint_sup_point_cdf(1.0, 1.0, 4.0, 4.0, &cfg, SupPointRoute::Scalar).unwrap();
    let mx = joint_sup_point_cdf(1.0, 1.0, 4.0, 4.0, &cfg, SupPointRoute::Matrix).unwrap();
    println!("scalar    = {:.15} (delta {:.2e})", sc.value, sc.delta);
    println!("matrix    = {:.15} (delta {:.2e})  diff = {:.3e}", mx.value, mx.delta, sc.value - mx.value);
    let tt = two_time_cdf(0.0, 0.3, 1.0, -0.2, &cfg).unwrap();
    println!("twotime(1; 0.3,-0.2) = {:.15}  [want 0.941525626054...]", tt.value);
    let ttm = two_time_cdf(0.0, 12.0, 1.0, 0.0, &cfg).unwrap();
    println!("twotime(1; 12,0) = {:.15}  [want F_GUE(0)]", ttm.value);
    println!("-- elapsed {:?}", t0.elapsed());
    let mom = endpoint_moments(&cfg, 4.0).unwrap();
    println!("mass = {:.10}  var = {:.6}  exkurt = {:.6}  odd1 = {:.2e}  [want 1, 0.24094, -0.23736]", mom.total_mass, mom.variance, mom.excess_kurtosis, mom.odd_moment_1);
    println!("-- total {:?}", t0.elapsed());
}
