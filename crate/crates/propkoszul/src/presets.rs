//! Built-in presentations. Each preset is stored as a presentation
//! document in the same format accepted from files, so loading a preset
//! exercises the parser and the relation graphs are fully spelled out for
//! auditing.

use crate::presentation::{parse_presentation, Presentation};
use crate::{Error, Result};

const LIE_OPERAD: &str = r#"
name = "lie-operad"

[[generators]]
id = "b"
outputs = 1
inputs = 2
left_symmetry = "trivial"
right_symmetry = "sign"

[[relations]]
component = [1, 3]
terms = [
  { coef = "1", graph = "u:b; v:b; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; in[3] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "1", graph = "u:b; v:b; in[2] -> u.in[1]; in[3] -> u.in[2]; u.out[1] -> v.in[1]; in[1] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "1", graph = "u:b; v:b; in[3] -> u.in[1]; in[1] -> u.in[2]; u.out[1] -> v.in[1]; in[2] -> v.in[2]; v.out[1] -> out[1]" },
]
"#;

const COM_OPERAD: &str = r#"
name = "com-operad"

[[generators]]
id = "mu"
outputs = 1
inputs = 2
left_symmetry = "trivial"
right_symmetry = "trivial"

[[relations]]
component = [1, 3]
terms = [
  { coef = "1", graph = "u:mu; v:mu; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; in[3] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "-1", graph = "u:mu; v:mu; in[2] -> u.in[1]; in[3] -> u.in[2]; in[1] -> v.in[1]; u.out[1] -> v.in[2]; v.out[1] -> out[1]" },
]
"#;

const ASS_OPERAD: &str = r#"
name = "ass-operad"

[[generators]]
id = "mu"
outputs = 1
inputs = 2
left_symmetry = "trivial"
right_symmetry = "regular"

[[relations]]
component = [1, 3]
terms = [
  { coef = "1", graph = "u:mu; v:mu; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; in[3] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "-1", graph = "u:mu; v:mu; in[2] -> u.in[1]; in[3] -> u.in[2]; in[1] -> v.in[1]; u.out[1] -> v.in[2]; v.out[1] -> out[1]" },
]
"#;

const NILPOTENT_ALGEBRA: &str = r#"
name = "nilpotent-algebra"

[[generators]]
id = "x"
outputs = 1
inputs = 1
left_symmetry = "trivial"
right_symmetry = "trivial"

[[relations]]
component = [1, 1]
terms = [
  { coef = "1", graph = "u:x; v:x; in[1] -> u.in[1]; u.out[1] -> v.in[1]; v.out[1] -> out[1]" },
]
"#;

const BILIE: &str = r#"
name = "bilie"

[[generators]]
id = "b"
outputs = 1
inputs = 2
left_symmetry = "trivial"
right_symmetry = "sign"

[[generators]]
id = "c"
outputs = 2
inputs = 1
left_symmetry = "sign"
right_symmetry = "trivial"

[[relations]]
component = [1, 3]
terms = [
  { coef = "1", graph = "u:b; v:b; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; in[3] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "1", graph = "u:b; v:b; in[2] -> u.in[1]; in[3] -> u.in[2]; u.out[1] -> v.in[1]; in[1] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "1", graph = "u:b; v:b; in[3] -> u.in[1]; in[1] -> u.in[2]; u.out[1] -> v.in[1]; in[2] -> v.in[2]; v.out[1] -> out[1]" },
]

[[relations]]
component = [3, 1]
terms = [
  { coef = "1", graph = "u:c; v:c; in[1] -> u.in[1]; u.out[1] -> v.in[1]; u.out[2] -> out[3]; v.out[1] -> out[1]; v.out[2] -> out[2]" },
  { coef = "1", graph = "u:c; v:c; in[1] -> u.in[1]; u.out[1] -> v.in[1]; u.out[2] -> out[1]; v.out[1] -> out[2]; v.out[2] -> out[3]" },
  { coef = "1", graph = "u:c; v:c; in[1] -> u.in[1]; u.out[1] -> v.in[1]; u.out[2] -> out[2]; v.out[1] -> out[3]; v.out[2] -> out[1]" },
]

[[relations]]
component = [2, 2]
terms = [
  { coef = "1", graph = "u:b; v:c; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; v.out[1] -> out[1]; v.out[2] -> out[2]" },
  { coef = "-1", graph = "u:c; v:b; in[2] -> u.in[1]; in[1] -> v.in[1]; u.out[1] -> v.in[2]; v.out[1] -> out[1]; u.out[2] -> out[2]" },
  { coef = "-1", graph = "u:c; v:b; in[2] -> u.in[1]; u.out[1] -> out[1]; in[1] -> v.in[1]; u.out[2] -> v.in[2]; v.out[1] -> out[2]" },
  { coef = "-1", graph = "u:c; v:b; in[1] -> u.in[1]; u.out[1] -> v.in[1]; in[2] -> v.in[2]; v.out[1] -> out[1]; u.out[2] -> out[2]" },
  { coef = "-1", graph = "u:c; v:b; in[1] -> u.in[1]; u.out[1] -> out[1]; u.out[2] -> v.in[1]; in[2] -> v.in[2]; v.out[1] -> out[2]" },
]
"#;

const BILIE0: &str = r#"
name = "bilie0"

[[generators]]
id = "b"
outputs = 1
inputs = 2
left_symmetry = "trivial"
right_symmetry = "sign"

[[generators]]
id = "c"
outputs = 2
inputs = 1
left_symmetry = "sign"
right_symmetry = "trivial"

[[relations]]
component = [1, 3]
terms = [
  { coef = "1", graph = "u:b; v:b; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; in[3] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "1", graph = "u:b; v:b; in[2] -> u.in[1]; in[3] -> u.in[2]; u.out[1] -> v.in[1]; in[1] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "1", graph = "u:b; v:b; in[3] -> u.in[1]; in[1] -> u.in[2]; u.out[1] -> v.in[1]; in[2] -> v.in[2]; v.out[1] -> out[1]" },
]

[[relations]]
component = [3, 1]
terms = [
  { coef = "1", graph = "u:c; v:c; in[1] -> u.in[1]; u.out[1] -> v.in[1]; u.out[2] -> out[3]; v.out[1] -> out[1]; v.out[2] -> out[2]" },
  { coef = "1", graph = "u:c; v:c; in[1] -> u.in[1]; u.out[1] -> v.in[1]; u.out[2] -> out[1]; v.out[1] -> out[2]; v.out[2] -> out[3]" },
  { coef = "1", graph = "u:c; v:c; in[1] -> u.in[1]; u.out[1] -> v.in[1]; u.out[2] -> out[2]; v.out[1] -> out[3]; v.out[2] -> out[1]" },
]

[[relations]]
component = [2, 2]
terms = [
  { coef = "1", graph = "u:b; v:c; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; v.out[1] -> out[1]; v.out[2] -> out[2]" },
]
"#;

const INFBI: &str = r#"
name = "infbi"

[[generators]]
id = "mu"
outputs = 1
inputs = 2
left_symmetry = "trivial"
right_symmetry = "regular"

[[generators]]
id = "delta"
outputs = 2
inputs = 1
left_symmetry = "regular"
right_symmetry = "trivial"

[[relations]]
component = [1, 3]
terms = [
  { coef = "1", graph = "u:mu; v:mu; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; in[3] -> v.in[2]; v.out[1] -> out[1]" },
  { coef = "-1", graph = "u:mu; v:mu; in[2] -> u.in[1]; in[3] -> u.in[2]; in[1] -> v.in[1]; u.out[1] -> v.in[2]; v.out[1] -> out[1]" },
]

[[relations]]
component = [3, 1]
terms = [
  { coef = "1", graph = "u:delta; v:delta; in[1] -> u.in[1]; u.out[1] -> v.in[1]; v.out[1] -> out[1]; v.out[2] -> out[2]; u.out[2] -> out[3]" },
  { coef = "-1", graph = "u:delta; v:delta; in[1] -> u.in[1]; u.out[1] -> out[1]; u.out[2] -> v.in[1]; v.out[1] -> out[2]; v.out[2] -> out[3]" },
]

[[relations]]
component = [2, 2]
terms = [
  { coef = "1", graph = "u:mu; v:delta; in[1] -> u.in[1]; in[2] -> u.in[2]; u.out[1] -> v.in[1]; v.out[1] -> out[1]; v.out[2] -> out[2]" },
  { coef = "-1", graph = "u:delta; v:mu; in[2] -> u.in[1]; in[1] -> v.in[1]; u.out[1] -> v.in[2]; v.out[1] -> out[1]; u.out[2] -> out[2]" },
  { coef = "-1", graph = "u:delta; v:mu; in[1] -> u.in[1]; u.out[1] -> out[1]; u.out[2] -> v.in[1]; in[2] -> v.in[2]; v.out[1] -> out[2]" },
]
"#;

pub const PRESET_NAMES: [&str; 7] = [
    "bilie",
    "bilie0",
    "infbi",
    "lie-operad",
    "ass-operad",
    "com-operad",
    "nilpotent-algebra",
];

/// Loads a built-in presentation by name.
pub fn load_preset(name: &str) -> Result<Presentation> {
    let text = match name {
        "bilie" => BILIE,
        "bilie0" => BILIE0,
        "infbi" => INFBI,
        "lie-operad" => LIE_OPERAD,
        "ass-operad" => ASS_OPERAD,
        "com-operad" => COM_OPERAD,
        "nilpotent-algebra" => NILPOTENT_ALGEBRA,
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    parse_presentation(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{parse_presentation, serialize_presentation};

    #[test]
    fn all_presets_parse() {
        for name in PRESET_NAMES {
            let p = load_preset(name).unwrap();
            assert_eq!(p.name, name);
        }
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(matches!(
            load_preset("frobenius"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn bilie_has_two_generators_three_relation_components() {
        let p = load_preset("bilie").unwrap();
        assert_eq!(p.generators.len(), 2);
        let mut comps: Vec<[usize; 2]> = p.relations.iter().map(|r| r.component).collect();
        comps.sort();
        assert_eq!(comps, vec![[1, 3], [2, 2], [3, 1]]);
    }

    #[test]
    fn lie_operad_relations_only_in_one_three() {
        let p = load_preset("lie-operad").unwrap();
        assert_eq!(p.generators.len(), 1);
        assert!(p.relations.iter().all(|r| r.component == [1, 3]));
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESET_NAMES {
            let p = load_preset(name).unwrap();
            let text = serialize_presentation(&p);
            let q = parse_presentation(&text).unwrap();
            assert_eq!(p, q, "round trip failed for {name}");
        }
    }

    #[test]
    fn three_vertex_relation_rejected() {
        let text = r#"
name = "bad"

[[generators]]
id = "x"
outputs = 1
inputs = 1
left_symmetry = "trivial"
right_symmetry = "trivial"

[[relations]]
component = [1, 1]
terms = [
  { coef = "1", graph = "u:x; v:x; w:x; in[1] -> u.in[1]; u.out[1] -> v.in[1]; v.out[1] -> w.in[1]; w.out[1] -> out[1]" },
]
"#;
        let err = parse_presentation(text).unwrap_err();
        assert!(err.to_string().contains("exactly 2 vertices"), "{err}");
    }

    #[test]
    fn disconnected_relation_rejected() {
        let text = r#"
name = "bad"

[[generators]]
id = "x"
outputs = 1
inputs = 1
left_symmetry = "trivial"
right_symmetry = "trivial"

[[relations]]
component = [2, 2]
terms = [
  { coef = "1", graph = "u:x; v:x; in[1] -> u.in[1]; in[2] -> v.in[1]; u.out[1] -> out[1]; v.out[1] -> out[2]" },
]
"#;
        let err = parse_presentation(text).unwrap_err();
        assert!(err.to_string().contains("connected"), "{err}");
    }

    #[test]
    fn reversal_is_involutive() {
        for name in PRESET_NAMES {
            let p = load_preset(name).unwrap();
            let rr = p.reversed().reversed();
            assert_eq!(p.generators, rr.generators);
            assert_eq!(p.relations.len(), rr.relations.len());
            for (a, b) in p.relations.iter().zip(&rr.relations) {
                assert_eq!(a.component, b.component);
                assert_eq!(a.terms.len(), b.terms.len());
            }
            rr.validate().unwrap();
        }
    }
}
