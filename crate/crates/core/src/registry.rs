//! Built-in catalogue of published sub-optimal signature matrices.
//!
//! Ids follow `tab<group>.<name>`. Group III holds capacity-optimized GA
//! matrices, IV ED-optimized GA matrices, V QD/MD/BER GA matrices and VI PSO
//! matrices for every criterion.

use serde::Serialize;

use crate::criteria::CriterionKind;
use crate::error::{Error, Result};
use crate::matrix::{Alphabet, SignatureMatrix};
use crate::optimize::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub table: &'static str,
    pub criterion: CriterionKind,
    pub optimizer: Algorithm,
    /// Eb/N0 (dB) the matrix was optimized for.
    pub design_ebn0_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRegistryEntry {
    pub id: &'static str,
    pub matrix: SignatureMatrix,
    pub provenance: Provenance,
}

struct Raw {
    id: &'static str,
    table: &'static str,
    criterion: CriterionKind,
    optimizer: Algorithm,
    design_ebn0_db: f64,
    alphabet: Alphabet,
    rows: &'static [&'static [f64]],
}

use Algorithm::{Ga, Pso};
use CriterionKind::{Ber, Capacity, Ed, Md, Qd};

const RAW: &[Raw] = &[
    Raw {
        id: "tabIII.A1",
        table: "III",
        criterion: Capacity,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.1235, 0.3177, 0.7605, 0.8739, 0.4069],
            &[0.3723, 0.9240, 0.5021, 0.0154, -0.2553],
        ],
    },
    Raw {
        id: "tabIII.A2",
        table: "III",
        criterion: Capacity,
        optimizer: Ga,
        design_ebn0_db: 11.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[-0.3724, 0.7299, -0.0115, 1.0000, 0.5408],
            &[-0.5254, 0.2538, 0.9584, -0.3117, -0.7224],
        ],
    },
    Raw {
        id: "tabIII.A3",
        table: "III",
        criterion: Capacity,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.9764, 0.3895, 0.7448, -0.9375],
            &[-1.0000, 0.1711, 0.4241, 0.6451],
            &[0.8529, 0.6424, 0.0930, 1.0000],
        ],
    },
    Raw {
        id: "tabIII.A4",
        table: "III",
        criterion: Capacity,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0, 1.0, 0.969, 0.468, 1.0],
            &[0.424, -1.0, 0.5, -0.871, 0.5],
            &[1.0, 0.015, -0.906, -0.75, 0.719],
            &[0.430, 0.995, -0.938, 0.984, 0.984],
        ],
    },
    Raw {
        id: "tabIII.A5",
        table: "III",
        criterion: Capacity,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Binary,
        rows: &[
            &[1.0, 1.0, 1.0, 1.0, 1.0],
            &[1.0, -1.0, 1.0, -1.0, 1.0],
            &[1.0, 1.0, -1.0, -1.0, 1.0],
            &[1.0, -1.0, -1.0, 1.0, -1.0],
        ],
    },
    Raw {
        id: "tabIV.A1",
        table: "IV",
        criterion: Ed,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.0591, 0.8787, -0.6226, 0.4163, 0.2166],
            &[-0.9198, 0.1760, 0.1907, 0.6094, 0.8851],
        ],
    },
    Raw {
        id: "tabIV.A2",
        table: "IV",
        criterion: Ed,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.9572, 0.4704, 0.5922, 0.1288],
            &[-1.0000, 0.8393, 0.3621, 0.7090],
            &[0.3995, 0.6776, -0.7468, -0.1777],
        ],
    },
    Raw {
        id: "tabIV.A3",
        table: "IV",
        criterion: Ed,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Binary,
        rows: &[
            &[-1.0, -1.0, 1.0, -1.0, 1.0],
            &[-1.0, 1.0, -1.0, 1.0, 1.0],
            &[1.0, 1.0, -1.0, -1.0, 1.0],
            &[-1.0, -1.0, -1.0, -1.0, -1.0],
        ],
    },
    Raw {
        id: "tabV.QD.3x4",
        table: "V",
        criterion: Qd,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.4520, -0.3740, 0.9029, 0.1059],
            &[-0.7780, 0.3048, 0.9585, -0.6561],
            &[0.9163, 0.4018, 0.3265, -0.0717],
        ],
    },
    Raw {
        id: "tabV.MD.3x4",
        table: "V",
        criterion: Md,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.5924, 0.1238, 0.4630, -0.4371],
            &[0.0557, 0.4388, 0.6436, 0.5020],
            &[0.9595, 0.4137, 0.0075, 0.4325],
        ],
    },
    Raw {
        id: "tabV.BER.3x4",
        table: "V",
        criterion: Ber,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.2502, 0.4917, 0.1048, -0.9300],
            &[0.6206, 0.9009, -0.9958, 0.4022],
            &[0.9903, 0.2592, 0.4383, 0.9961],
        ],
    },
    Raw {
        id: "tabV.QD.2x5",
        table: "V",
        criterion: Qd,
        optimizer: Ga,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.5315, 0.9989, -0.9456, 0.5273, 0.4257],
            &[0.4364, 0.3203, 0.5859, -0.9514, 0.7039],
        ],
    },
    Raw {
        id: "tabVI.capacity.2x5",
        table: "VI",
        criterion: Capacity,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0000, 0.0, 1.0000, 1.0000, -0.3120],
            &[0.9419, 1.0000, -0.6067, 0.0812, 0.6859],
        ],
    },
    Raw {
        id: "tabVI.capacity.3x4",
        table: "VI",
        criterion: Capacity,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.0, 0.0, 1.0000, 0.3137],
            &[0.0, 1.0000, 1.0000, 0.0],
            &[1.0000, 0.0, 1.0000, 0.0],
        ],
    },
    Raw {
        id: "tabVI.ED.2x5",
        table: "VI",
        criterion: Ed,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0000, 1.0000, 1.0000, 0.5432, -0.0269],
            &[0.5206, 0.1099, -0.2031, 1.0000, 1.0000],
        ],
    },
    Raw {
        id: "tabVI.ED.3x4",
        table: "VI",
        criterion: Ed,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0000, 0.0, 0.0665, 1.0000],
            &[0.0, 1.0000, 0.0, 1.0000],
            &[0.0, 0.0, 1.0000, 1.0000],
        ],
    },
    Raw {
        id: "tabVI.MD.2x5",
        table: "VI",
        criterion: Md,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[0.3045, 0.6719, 1.0000, 0.2925, -0.0804],
            &[1.0000, 0.2708, 0.0711, -0.7045, 1.0000],
        ],
    },
    Raw {
        id: "tabVI.MD.3x4",
        table: "VI",
        criterion: Md,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0000, 0.0, 1.0000, 0.0483],
            &[1.0000, 1.0000, 0.0574, 0.0],
            &[1.0000, 0.0701, 0.0, 1.0000],
        ],
    },
    Raw {
        id: "tabVI.BER.2x5",
        table: "VI",
        criterion: Ber,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0000, -0.7644, 0.0, 1.0000, 0.4113],
            &[1.0000, 1.0000, 0.5402, -0.4707, 1.0000],
        ],
    },
    Raw {
        id: "tabVI.BER.3x4",
        table: "VI",
        criterion: Ber,
        optimizer: Pso,
        design_ebn0_db: 8.0,
        alphabet: Alphabet::Real,
        rows: &[
            &[1.0000, 1.0000, -0.2516, -0.9898],
            &[1.0000, -0.1536, 1.0000, -0.0209],
            &[1.0000, 0.0, -0.6976, 1.0000],
        ],
    },
];

fn build(raw: &Raw) -> MatrixRegistryEntry {
    MatrixRegistryEntry {
        id: raw.id,
        matrix: SignatureMatrix::from_rows_with(raw.rows, raw.alphabet)
            .expect("registry matrices are well formed"),
        provenance: Provenance {
            table: raw.table,
            criterion: raw.criterion,
            optimizer: raw.optimizer,
            design_ebn0_db: raw.design_ebn0_db,
        },
    }
}

/// Every registry entry, in table order.
pub fn all() -> Vec<MatrixRegistryEntry> {
    RAW.iter().map(build).collect()
}

pub fn ids() -> impl Iterator<Item = &'static str> {
    RAW.iter().map(|r| r.id)
}

pub fn get(id: &str) -> Result<MatrixRegistryEntry> {
    RAW.iter()
        .find(|r| r.id.eq_ignore_ascii_case(id))
        .map(build)
        .ok_or_else(|| Error::UnknownMatrix(id.to_string()))
}
