//! Reference lattices: the densest packing bases the random-restart search
//! recovers in the first regime (Case III, p in [1, 1.5]) and the second
//! regime (Case I, p in [1.6, 2]).
//!
//! Matrices are stored with the lattice generators as *columns*, matching
//! [`crate::lattice::Basis`]. Entries carry 12 significant digits.

// the fcc entries are 12-digit table data, not 1/√2 spelled out
#![allow(clippy::approx_constant)]

/// Case III optima for p = 1, 1.1, ..., 1.5. These are circulant bases
/// L(x, y, z); at p = 1 the basis generates the densest lattice packing of
/// regular octahedra (density 18/19).
pub const FIRST_REGIME: [(f64, [[f64; 3]; 3]); 6] = [
    (
        1.0,
        [
            [-0.333333333333, 0.166666666667, 0.5],
            [0.5, -0.333333333333, 0.166666666667],
            [0.166666666667, 0.5, -0.333333333333],
        ],
    ),
    (
        1.1,
        [
            [-0.364125450067, 0.193419513868, 0.539049770666],
            [0.539049770666, -0.364125450067, 0.193419513867],
            [0.193419513867, 0.539049770666, -0.364125450068],
        ],
    ),
    (
        1.2,
        [
            [-0.392613644302, 0.22381214158, 0.569113821114],
            [0.569113821115, -0.392613644298, 0.223812141583],
            [0.223812141575, 0.569113821114, -0.392613644306],
        ],
    ),
    (
        1.3,
        [
            [-0.419839537546, 0.260336714788, 0.589023079183],
            [0.589023079194, -0.419839537534, 0.260336714788],
            [0.260336714754, 0.589023079183, -0.419839537578],
        ],
    ),
    (
        1.4,
        [
            [-0.446984776893, 0.307534456657, 0.595696355817],
            [0.595696355844, -0.446984776872, 0.307534456649],
            [0.307534456588, 0.595696355814, -0.446984776962],
        ],
    ),
    (
        1.5,
        [
            [-0.475292821919, 0.375983627555, 0.580059051165],
            [0.580059051205, -0.475292821888, 0.375983627545],
            [0.375983627482, 0.58005905116, -0.475292821997],
        ],
    ),
];

/// Case I optima for p = 1.6, ..., 2.0, transposed into column-generator
/// form. At p = 2 the basis generates the face centered cubic lattice
/// (density π/√18).
pub const SECOND_REGIME: [(f64, [[f64; 3]; 3]); 5] = [
    (
        1.6,
        [
            [-0.000274732684343, 0.509783945989, 0.509509213365],
            [0.00144215026174, 0.500572697171, -0.499408255119],
            [-0.999980951403, -0.499408517681, -0.500850623006],
        ],
    ),
    (
        1.7,
        [
            [0.458033772615, -0.530691863753, -0.0936769789857],
            [0.556735224273, 0.577007354869, -0.0202829019484],
            [0.553047497039, 0.459643833129, 0.988672468644],
        ],
    ),
    (
        1.8,
        [
            [-0.330208442415, 0.624661955256, 0.237379400053],
            [-0.696395141028, -0.637870063365, -0.0588146621535],
            [0.551458413193, 0.316559795406, 0.954027742247],
        ],
    ),
    (
        1.9,
        [
            [-0.325366212309, 0.230698700286, -0.697856599406],
            [-0.0828873750566, 0.676231149106, 0.59207566084],
            [0.930867632285, 0.66666839749, 0.335768664213],
        ],
    ),
    (
        2.0,
        [
            [0.0, 0.707106781623, 0.707106781623],
            [0.707106781187, 0.0, 0.70710678075],
            [0.707106781187, 0.70710678075, 0.0],
        ],
    ),
];
