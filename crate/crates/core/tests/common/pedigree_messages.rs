//! Reference pedigree messages, rounded to four decimals, on the
//! seven-cluster reference tree rooted at cluster 0. Clusters are 0-based;
//! separators are listed in ascending variable order with the last variable
//! varying fastest.

pub struct Row {
    pub from: usize,
    pub to: usize,
    /// Printed values are the message times this factor.
    pub scale: f64,
    pub printed: [f64; 9],
}

pub const ROWS: [Row; 12] = [
    Row {
        from: 6,
        to: 5,
        scale: 1.0,
        printed: [0.0, 0.0, 0.0, 0.0, 0.25, 0.5, 0.0, 0.5, 1.0],
    },
    Row {
        from: 5,
        to: 3,
        scale: 1.0,
        printed: [0.0, 0.0, 0.0, 0.02, 0.05, 0.0, 0.0, 0.08, 0.0],
    },
    Row {
        from: 4,
        to: 3,
        scale: 1.0,
        printed: [0.0, 0.0, 0.0, 0.0, 0.25, 0.5, 0.0, 0.5, 1.0],
    },
    Row {
        from: 3,
        to: 1,
        scale: 1.0,
        printed: [0.0, 0.0, 0.0, 0.0, 0.025, 0.05, 0.0, 0.04, 0.08],
    },
    Row {
        from: 2,
        to: 1,
        scale: 1.0,
        printed: [0.8, 0.2, 0.0, 0.4, 0.5, 0.1, 0.0, 0.8, 0.2],
    },
    Row {
        from: 1,
        to: 0,
        scale: 1.0,
        printed: [
            0.0, 0.0, 0.0, 0.0025, 0.0088, 0.0150, 0.0040, 0.0140, 0.0240,
        ],
    },
    Row {
        from: 0,
        to: 1,
        scale: 1000.0,
        printed: [0.0, 0.0, 0.0, 0.0, 0.0, 3.2, 0.0, 0.0, 4.8],
    },
    Row {
        from: 1,
        to: 2,
        scale: 1000.0,
        printed: [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.136, 0.272],
    },
    Row {
        from: 1,
        to: 3,
        scale: 1000.0,
        printed: [0.0, 0.0, 0.0, 0.0, 2.56, 0.64, 0.0, 3.84, 0.96],
    },
    Row {
        from: 3,
        to: 4,
        scale: 1000.0,
        printed: [0.0, 0.0512, 0.0128, 0.0, 0.4352, 0.1088, 0.0, 0.0, 0.0],
    },
    Row {
        from: 3,
        to: 5,
        scale: 1000.0,
        printed: [0.0, 0.0, 0.0, 0.0, 0.96, 1.92, 0.0, 1.44, 2.88],
    },
    Row {
        from: 5,
        to: 6,
        scale: 1000.0,
        printed: [0.0, 0.0, 0.0, 0.3072, 0.1536, 0.0192, 0.9216, 0.2304, 0.0],
    },
];

/// Absolute tolerance against the printed four-decimal values. The small
/// slack keeps values that sit exactly on the rounding boundary inside.
pub const PRINTED_TOL: f64 = 5e-5 + 1e-12;
