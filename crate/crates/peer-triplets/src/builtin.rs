//! Coefficient data of the four published 4-stage Peer triplets.
//!
//! Entries printed as fractions are stored as exact rationals (evaluated to
//! the correctly rounded f64 quotient), the algebraic nodes of AP4o43vs are
//! computed from their closed form with sqrt(29), and 16/17-digit decimal
//! entries are kept verbatim.

use crate::linalg::Mat;
use crate::triplet::{BHat, Laurent, Orders, PeerTriplet, TripletError};

pub const BUILTIN_NAMES: &[&str] = &["AP4o33vg", "AP4o33vs", "AP4o43vs", "AP4o33va"];

/// Load one of the published triplets by name.
pub fn load_builtin(name: &str) -> Result<PeerTriplet, TripletError> {
    match name {
        "AP4o33vg" => Ok(ap4o33vg()),
        "AP4o33vs" => Ok(ap4o33vs()),
        "AP4o43vs" => Ok(ap4o43vs()),
        "AP4o33va" => Ok(ap4o33va()),
        other => Err(TripletError::UnknownTriplet(other.to_string())),
    }
}

/// The self-adjoint "pulcherrima" triplet for general grids.
///
/// K carries the 3/8-rule quadrature weights (1, 3, 3, 1)/8 on the nodes
/// (0, 1/3, 2/3, 1); the whole triplet coincides with its own adjoint.
fn ap4o33vg() -> PeerTriplet {
    let k = Mat::diag(&[1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0]);
    PeerTriplet {
        name: "AP4o33vg".to_string(),
        s: 4,
        c: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
        a0: Mat::from_rows(&[
            &[49.0 / 80.0, 3.0 / 4.0, -3.0 / 16.0, 0.0],
            &[-87.0 / 80.0, 0.0, 9.0 / 16.0, 0.0],
            &[87.0 / 80.0, -9.0 / 4.0, 27.0 / 16.0, 0.0],
            &[-49.0 / 80.0, 3.0 / 2.0, -33.0 / 16.0, 1.0],
        ]),
        k0: k.clone(),
        a: Mat::from_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[-9.0 / 4.0, 9.0 / 4.0, 0.0, 0.0],
            &[9.0 / 4.0, -9.0 / 2.0, 9.0 / 4.0, 0.0],
            &[-1.0, 9.0 / 4.0, -9.0 / 4.0, 1.0],
        ]),
        k: k.clone(),
        an: Mat::from_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[-33.0 / 16.0, 27.0 / 16.0, 9.0 / 16.0, -3.0 / 16.0],
            &[3.0 / 2.0, -9.0 / 4.0, 0.0, 3.0 / 4.0],
            &[-49.0 / 80.0, 87.0 / 80.0, -87.0 / 80.0, 49.0 / 80.0],
        ]),
        kn: k,
        bhat: BHat {
            a_1s: 1.0,
            a_s1: 0.0,
            east: vec![Laurent::new(vec![(-1, 1.0 / 36.0)]), Laurent::zero()],
            south: vec![
                Laurent::new(vec![(1, 1.0 / 36.0)]),
                Laurent::new(vec![(1, 1.0 / 18.0)]),
            ],
            corner: Laurent::new(vec![(0, 13.0 / 1340.0), (2, 1.0 / 20.0)]),
        },
        w: Mat::from_rows(&[
            &[1.0, -2.0, 24.0 / 5.0, -9.0 / 2.0],
            &[1.0, -4.0 / 3.0, 0.0, 3.0 / 2.0],
            &[1.0, -2.0 / 3.0, -8.0 / 5.0, 3.0 / 2.0],
            &[1.0, 0.0, 0.0, 0.0],
        ]),
        orders: Orders {
            r: 3,
            q: 3,
            r1: 3,
            q_b: None,
        },
        sigma_interval: (0.57, 1.80),
    }
}

/// LSRK triplet with stability angle 83.74 degrees, for smooth grids.
fn ap4o33vs() -> PeerTriplet {
    let k = Mat::diag(&[
        0.2089552772313791,
        0.2461266069992848,
        0.4259606950456414,
        0.1189574207236947,
    ]);
    let a41 = 0.1010743874247749;
    PeerTriplet {
        name: "AP4o33vs".to_string(),
        s: 4,
        c: vec![
            144997.0 / 389708.0,
            73.0 / 748.0,
            77297572.0 / 117896267.0,
            1.0,
        ],
        a0: Mat::from_rows(&[
            &[
                2.773177556033415,
                -5.711973424498560,
                -0.4047906551114346,
                0.0,
            ],
            &[
                -0.2775983738279357,
                2.618694207814551,
                0.1431328584722113,
                0.0,
            ],
            &[
                -5.101798226146757,
                4.755733335146421,
                2.836975327925722,
                0.0,
            ],
            &[
                2.606219043941277,
                -1.662454118462412,
                -2.575317531286499,
                1.0,
            ],
        ]),
        k0: k.clone(),
        a: Mat::from_rows(&[
            &[0.7588470158140062, 0.0, 0.0, 0.0],
            &[0.4346633458753195, 0.5989561692950702, 0.0, 0.0],
            &[
                -3.295204661275873,
                -0.3671669165116753,
                2.473930545531403,
                0.0,
            ],
            &[
                2.101694299586548,
                -0.2317892527833949,
                -2.473930545531403,
                1.0,
            ],
        ]),
        k: k.clone(),
        an: Mat::from_rows(&[
            &[0.7588470158140062, 0.0, 0.0, 0.0],
            &[
                0.1098911012176018,
                0.7137947386723661,
                0.2912786335371730,
                -0.08134495825675107,
            ],
            &[
                -1.064925547930965,
                -1.155787455679128,
                0.4736590838298028,
                0.5586128875241437,
            ],
            &[
                1.474979453185272,
                -0.01018461275608742,
                -1.911848510874736,
                0.8430281717173012,
            ],
        ]),
        kn: k,
        bhat: BHat {
            a_1s: 1.0,
            a_s1: a41,
            east: vec![
                Laurent::new(vec![(-1, 0.02321239244678227)]),
                Laurent::zero(),
            ],
            south: vec![
                Laurent::new(vec![(0, a41), (1, 0.003586671392069201)]),
                Laurent::new(vec![
                    (0, a41),
                    (1, 0.007173342784138403),
                    (2, -0.002465255918355442),
                ]),
            ],
            corner: Laurent::new(vec![
                (0, 0.0078782707622298066),
                (1, 0.1683589306029579),
                (2, -0.1125),
                (3, 0.025),
            ]),
        },
        w: Mat::from_rows(&[
            &[1.0, -49.0 / 3.0, -4.0, 27.0],
            &[1.0, -47.0 / 2.0, 33.0, -95.0 / 3.0],
            &[1.0, -9.0, -52.0 / 3.0, 119.0 / 5.0],
            &[1.0, 0.0, 0.0, 0.0],
        ]),
        orders: Orders {
            r: 3,
            q: 3,
            r1: 3,
            q_b: None,
        },
        sigma_interval: (0.65, 1.80),
    }
}

/// LSRK triplet with forward order 4 at sigma = 1, for smooth grids.
fn ap4o43vs() -> PeerTriplet {
    let s29 = 29.0_f64.sqrt();
    let a41 = -0.4373259052924791;
    PeerTriplet {
        name: "AP4o43vs".to_string(),
        s: 4,
        // c1 = (7 - sqrt(29))/20: the /20 denominator is what matches the
        // quadrature moments and the printed value 0.0807.
        c: vec![(7.0 - s29) / 20.0, 0.5, (3.0 + s29) / 10.0, 1.0],
        a0: Mat::from_rows(&[
            &[
                -2.258093793670717,
                1.862197768561405,
                0.8958960251093118,
                0.0,
            ],
            &[
                11.58487375982880,
                -4.941113522467058,
                -3.725846848775559,
                -0.02162218680256198,
            ],
            &[
                -21.42711527957095,
                7.401740825625927,
                8.196612369685553,
                0.2072923201571290,
            ],
            &[
                12.10033531341286,
                -4.322825071720274,
                -5.366661546019306,
                0.8143298666454331,
            ],
        ]),
        k0: Mat::from_rows(&[
            &[0.5, 1.0, 0.0, 0.0],
            &[
                -1.120097818618729,
                -3.509114262220923,
                0.02331113741482591,
                -0.07507889931006730,
            ],
            &[
                1.951080835579074,
                6.817902173284554,
                0.04964515498231075,
                0.2324661353733601,
            ],
            &[
                -1.097482134196919,
                -3.777428018384294,
                0.04886693226626865,
                -0.04407123616946104,
            ],
        ]),
        a: Mat::from_rows(&[
            &[2.932991332809296, 0.0, 0.0, 0.0],
            &[-9.722226151163717, 2.605421230471736, 0.0, 0.0],
            &[
                15.03085810481218,
                -5.510604377851853,
                2.011734286390463,
                0.0,
            ],
            &[
                -8.241623286457758,
                2.905183147380117,
                -2.011734286390463,
                1.0,
            ],
        ]),
        k: Mat::diag(&[
            0.2392605543426944,
            0.5076556795243664,
            0.1624309662178738,
            0.09065279991506543,
        ]),
        an: Mat::from_rows(&[
            &[
                2.133506902525376,
                -1.201712432255361,
                2.001196862539281,
                0.0,
            ],
            &[
                -6.352860439191028,
                7.343234398037428,
                -8.042312319130696,
                -0.06486656040768594,
            ],
            &[
                9.042449972383633,
                -12.89903567845361,
                14.76669675894938,
                0.6218769604713869,
            ],
            &[
                -4.823096435717981,
                6.757513712671541,
                -8.725581302357963,
                0.4429895999362990,
            ],
        ]),
        kn: Mat::from_rows(&[
            &[0.3352224422310586, 0.6666666666666666, 0.25, 0.0],
            &[
                -0.4081466631436265,
                -2.243551054735366,
                -0.9919828228000089,
                -0.01618666259097973,
            ],
            &[
                0.7502573728050319,
                4.650087123227831,
                1.851360793436682,
                0.05011862096669070,
            ],
            &[
                -0.4323129259705010,
                -2.589251268789736,
                -0.9063392628643313,
                0.03405764156058810,
            ],
        ]),
        bhat: BHat {
            a_1s: 1.0,
            a_s1: a41,
            east: vec![
                Laurent::new(vec![(-1, 0.006728479970272900)]),
                Laurent::zero(),
            ],
            south: vec![
                Laurent::new(vec![(0, a41), (1, 0.0007142621905395870)]),
                Laurent::new(vec![
                    (0, a41),
                    (1, 0.001428524381079174),
                    (2, 0.005699612131335000),
                ]),
            ],
            corner: Laurent::new(vec![
                (0, a41),
                (1, 0.002142786571618761),
                (2, -0.01091141501818702),
                (3, 0.01709883639400500),
            ]),
        },
        w: Mat::from_rows(&[
            &[1.0, -11.0 / 6.0, 25.0 / 6.0, -7.0 / 6.0],
            &[1.0, -1.0, -3.0 / 2.0, 1.0],
            &[1.0, -1.0 / 3.0, -3.0 / 2.0, -2.0 / 5.0],
            &[1.0, 0.0, 0.0, 0.0],
        ]),
        orders: Orders {
            r: 3,
            q: 3,
            r1: 4,
            q_b: Some(2),
        },
        sigma_interval: (0.47, 1.79),
    }
}

/// A-stable triplet with nodes outside [0, 1] and sign-changing K.
fn ap4o33va() -> PeerTriplet {
    let a41 = 4.607142857142857;
    PeerTriplet {
        name: "AP4o33va".to_string(),
        s: 4,
        c: vec![0.0, 53.0 / 34.0, 6242.0 / 30453.0, 298.0 / 153.0],
        a0: Mat::from_rows(&[
            &[
                -2.845147129315054,
                -0.4034338322824405,
                4.858078566685144,
                0.0,
            ],
            &[
                -3.334526877014251,
                0.1129706979359890,
                3.683717732206632,
                0.0,
            ],
            &[
                2.756370844715334,
                0.6933008415389270,
                -4.233985411744457,
                0.0,
            ],
            &[
                2.572062980946981,
                0.3827708538751709,
                -2.987953672161328,
                -0.2542255953866471,
            ],
        ]),
        k0: Mat::from_rows(&[
            &[-0.07894736842105263, -0.3541666666666667, 0.8, 0.0],
            &[-0.5092967024450286, -0.05954441426546966, 1.5, 0.0],
            &[
                -0.2793212824140483,
                0.4819625026869399,
                0.01024569899875302,
                0.0,
            ],
            &[
                0.4370032270471419,
                0.2582293704863321,
                -1.071186604429968,
                -0.13497776057693290,
            ],
        ]),
        a: Mat::from_rows(&[
            &[-6.403144243666246, 0.0, 0.0, 0.0],
            &[-6.032436530257817, 0.4188810164603250, 0.0, 0.0],
            &[
                7.334872792461045,
                0.1741541060226739,
                2.017487387419302,
                0.0,
            ],
            &[
                4.249467800796027,
                0.1925734385846475,
                -0.6976301724333114,
                -0.2542255953866471,
            ],
        ]),
        k: Mat::diag(&[
            -0.4305621262329876,
            0.32648079224113569,
            1.239059094568785,
            -0.1349777605769329,
        ]),
        an: Mat::from_rows(&[
            &[-6.4031442436662458, 0.0, 0.0, 0.0],
            &[
                -0.95260517222681956,
                1.865037832767615,
                -6.0,
                -0.5259881743382867,
            ],
            &[
                6.79592553738488869,
                0.3023172450424132,
                2.591223325518416,
                -0.1629518220426969,
            ],
            &[
                0.525998613319805586,
                -0.7619282537426990,
                3.676768004714683,
                0.04934710726892677,
            ],
        ]),
        kn: Mat::from_rows(&[
            &[-0.4305621262329876, 0.0, 0.0, 0.0],
            &[
                -0.7584777455167840,
                -0.4907990379996561,
                0.66666666666666667,
                0.9090909090909091,
            ],
            &[
                -0.4295489737333543,
                0.09171637742180421,
                1.7797533837522101,
                -0.2028616928718752,
            ],
            &[
                0.6522412050328370,
                0.3192953012669550,
                -0.51790142522729154,
                -0.5886128416494334,
            ],
        ]),
        bhat: BHat {
            a_1s: 1.108695652173913,
            a_s1: a41,
            east: vec![
                Laurent::new(vec![(-1, -0.4962124378026289)]),
                Laurent::new(vec![(-2, -0.6391248143857920)]),
            ],
            south: vec![
                Laurent::new(vec![(0, a41), (1, -0.2679484769093443)]),
                Laurent::new(vec![(0, a41), (1, -0.5358969538186886)]),
            ],
            corner: Laurent::new(vec![
                (0, -2198.0 / 55.0),
                (1, 1607.0 / 22.0),
                (2, -147.0 / 5.0),
            ]),
        },
        w: Mat::from_rows(&[
            &[1.0, -2.0, 6.0, 2.509523385281405],
            &[1.0, 1.117647058823529, 12.32698961937716, 7.052310433008046],
            &[
                1.0,
                -1.590056808852987,
                1.836922096090924,
                0.5167228373603610,
            ],
            &[1.0, 1.895424836601307, 27.53940792003076, 16.07292401233786],
        ]),
        orders: Orders {
            r: 3,
            q: 3,
            r1: 3,
            q_b: Some(2),
        },
        sigma_interval: (0.61, 1.52),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_an_error() {
        match load_builtin("AP9o99") {
            Err(TripletError::UnknownTriplet(name)) => assert_eq!(name, "AP9o99"),
            other => panic!("expected unknown-triplet error, got {:?}", other),
        }
    }

    #[test]
    fn pulcherrima_quadrature_weights() {
        let t = load_builtin("AP4o33vg").unwrap();
        let want = [1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0];
        for i in 0..4 {
            assert_eq!(t.k[(i, i)], want[i]);
        }
    }

    #[test]
    fn algebraic_nodes_of_ap4o43vs() {
        let t = load_builtin("AP4o43vs").unwrap();
        let s29 = 29.0_f64.sqrt();
        let want = [(7.0 - s29) / 20.0, 0.5, (3.0 + s29) / 10.0, 1.0];
        for i in 0..4 {
            assert!((t.c[i] - want[i]).abs() < 1e-15);
        }
        // Printed four-digit values from the construction.
        assert!((t.c[0] - 0.0807).abs() < 5e-5);
        assert!((t.c[2] - 0.8385).abs() < 5e-5);
    }

    #[test]
    fn bhat_last_row_of_pulcherrima_at_sigma_one() {
        let t = load_builtin("AP4o33vg").unwrap();
        let bh = t.b_hat(1.0).unwrap();
        assert_eq!(bh[(3, 0)], 0.0);
        assert!((bh[(3, 1)] - 1.0 / 36.0).abs() < 1e-16);
        assert!((bh[(3, 2)] - 1.0 / 18.0).abs() < 1e-16);
        assert!((bh[(3, 3)] - (13.0 / 1340.0 + 1.0 / 20.0)).abs() < 1e-16);
    }

    #[test]
    fn bhat_entry_24_scales_with_inverse_sigma() {
        let t = load_builtin("AP4o33vg").unwrap();
        let bh = t.b_hat(2.0).unwrap();
        assert!((bh[(1, 3)] - 1.0 / 72.0).abs() < 1e-16);
    }

    #[test]
    fn declared_metadata() {
        let t = load_builtin("AP4o43vs").unwrap();
        assert_eq!(t.orders.r1, 4);
        assert_eq!(t.orders.q_b, Some(2));
        assert_eq!(t.sigma_interval, (0.47, 1.79));
        let t = load_builtin("AP4o33vs").unwrap();
        assert_eq!(t.orders.q_b, None);
    }
}
