use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

// Antipodally symmetric electrostatic-repulsion sets on the upper
// hemisphere, first direction along z.
const DIRS_6: [[f64; 3]; 6] = [
    [0.0, 0.0, 1.0],
    [-0.8944271855399, 0.0, 0.4472136064199899],
    [0.7236067917390354, -0.5257311382677876, 0.4472135744862814],
    [-0.27639318449410855, 0.8506507883985346, 0.44721364442753464],
    [0.7236068052427757, 0.5257310934302786, 0.4472136053464244],
    [-0.27639321478328893, -0.8506508167993593, 0.4472135716862155],
];

const DIRS_10: [[f64; 3]; 10] = [
    [0.0, 0.0, 1.0],
    [-0.7365541062469577, 0.0, 0.6763786281150119],
    [0.7365541390247551, -3.795512904240165e-07, 0.6763785924209589],
    [-0.3224745553157957, -0.6622100066143642, 0.676378642709602],
    [-0.45915065108051417, 0.7342893798810847, 0.49999978620614655],
    [0.8478842211374585, 0.5301814288959258, 2.4314791769815547e-09],
    [0.4591505496358609, -0.7342895786831786, 0.4999995874061969],
    [0.11543537707127247, 0.9933149921955287, 9.987182231969746e-08],
    [-0.9435940276726213, 0.33110468275237925, 8.196951125221978e-08],
    [0.32247470766575326, 0.6622098105339995, 0.6763787620471327],
];

const DIRS_16: [[f64; 3]; 16] = [
    [0.0, 0.0, 1.0],
    [0.9428090833659839, 0.0, 0.33333321515053577],
    [-0.08198088100774566, -0.6015010355251985, 0.7946544150832535],
    [-0.6170764294910779, -0.25231143298995645, 0.7453560363672501],
    [0.09003028252895587, 0.6605595259906987, 0.7453560631340568],
    [-0.4714044437199642, -0.8164966663007557, 0.3333332332078869],
    [0.1326478085693964, 0.9732489684815524, 0.18759265505699027],
    [-0.47992460808104725, 0.3717481004598531, 0.7946544660182464],
    [0.527046163400188, -0.4082482271944081, 0.7453561072653564],
    [-0.9091823081201558, -0.3717479389180966, 0.18759264514221655],
    [0.7765344396701986, -0.6015008425330423, 0.18759264494678665],
    [0.6727183156774494, 0.660559655702891, 0.33333318018129204],
    [-0.9084204957922335, 0.25231139754089776, 0.33333340890998586],
    [-0.4714046089141069, 0.8164965914985042, 0.3333331828154268],
    [0.5619057586207807, 0.22975301340399212, 0.7946543092820865],
    [0.23570227404775385, -0.9128709455163563, 0.33333327892784953],
];

fn table(rows: &[[f64; 3]]) -> Vec<Vector3<f64>> {
    rows.iter()
        .map(|r| Vector3::new(r[0], r[1], r[2]).normalize())
        .collect()
}

/// Golden-angle spiral over the upper hemisphere, used for direction
/// counts without a shipped table.
pub fn hemisphere_directions(n: usize) -> Vec<Vector3<f64>> {
    let golden = core::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Directions for an anisotropic shell: the shipped tables for 6, 10 and
/// 16 directions, a spiral otherwise.
pub fn shell_directions(n: usize) -> Vec<Vector3<f64>> {
    match n {
        6 => table(&DIRS_6),
        10 => table(&DIRS_10),
        16 => table(&DIRS_16),
        _ => hemisphere_directions(n),
    }
}
