use burstdn_stabilize::{fit_rotation_homography, Intrinsics, Point, RansacParams};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dbg() {
    let (h, w) = (180usize, 240usize);
    let k = Intrinsics::guess(h, w);
    let yaw = 1.0f64.to_radians();
    let r = Matrix3::new(yaw.cos(), 0.0, yaw.sin(), 0.0, 1.0, 0.0, -yaw.sin(), 0.0, yaw.cos());
    let hm = k.matrix() * r * k.inverse();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<(Point, Point)> = (0..200).map(|_| {
        let q = Point { x: rng.gen_range(5.0..235.0), y: rng.gen_range(5.0..175.0) };
        let v = hm * Vector3::new(q.x, q.y, 1.0);
        (Point { x: v.x / v.z, y: v.y / v.z }, q)
    }).collect();
    // check: does true H have zero residual on pairs?
    let fit = fit_rotation_homography(&pairs, &k, &RansacParams::default()).unwrap();
    println!("true H: {:?}", hm / hm[(2,2)]);
    println!("fit  H: {:?}", fit.h);
    println!("inliers: {} residual {}", fit.inlier_count, fit.mean_residual);
    let r_rec = k.inverse() * fit.h * k.matrix();
    println!("r_rec: {r_rec:?}");
    println!("r_true: {r:?}");
}
