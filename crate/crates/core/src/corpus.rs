//! The bundled Class2Relational example: metamodels, one test case, the
//! faulty program with three seeded errors, its corrected version and the
//! patch that repairs it.

use crate::model::{parse_metamodel, parse_model, Metamodel, Model};
use crate::mtl::{parse_transformation, Transformation};

pub const CLASS_MM: &str = include_str!("../corpus/class2relational/Class.mm");
pub const RELATIONAL_MM: &str = include_str!("../corpus/class2relational/Relational.mm");
pub const FAMILY_INPUT: &str = include_str!("../corpus/class2relational/family.model");
pub const FAMILY_EXPECTED: &str = include_str!("../corpus/class2relational/family_expected.model");
pub const FAULTY: &str = include_str!("../corpus/class2relational/faulty.mtl");
pub const CORRECT: &str = include_str!("../corpus/class2relational/correct.mtl");
pub const REPAIR_PATCH: &str = include_str!("../corpus/class2relational/repair.patch");

/// Parsed corpus, for tests and examples.
pub struct Class2Relational {
    pub src: Metamodel,
    pub tgt: Metamodel,
    pub input: Model,
    pub expected: Model,
    pub faulty: Transformation,
    pub correct: Transformation,
}

impl Class2Relational {
    pub fn load() -> Self {
        let src = parse_metamodel(CLASS_MM).expect("bundled Class metamodel parses");
        let tgt = parse_metamodel(RELATIONAL_MM).expect("bundled Relational metamodel parses");
        let input = parse_model(FAMILY_INPUT, &src).expect("bundled input parses");
        let expected = parse_model(FAMILY_EXPECTED, &tgt).expect("bundled expected model parses");
        let faulty = parse_transformation(FAULTY).expect("bundled faulty program parses");
        let correct = parse_transformation(CORRECT).expect("bundled correct program parses");
        Class2Relational { src, tgt, input, expected, faulty, correct }
    }
}
