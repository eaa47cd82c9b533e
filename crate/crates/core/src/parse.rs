//! Text formats for subgraphs and kitchen inventories.
//!
//! Subgraph files are line-oriented with tab-separated fields:
//!
//! ```text
//! # comment
//! O<TAB>tea cup        begin an object node
//! S<TAB>contains       add a state to the current object
//! I<TAB>tea            add an ingredient to the current object
//! M<TAB>stir           the motion; objects before it are inputs, after it outputs
//! //                   end of the functional unit
//! ```
//!
//! Kitchen files hold one item per line as `label{state,...}[ingredient,...]`,
//! with both groups optional.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{FunctionalUnit, MotionNode, ObjectKey, ObjectNode, Subgraph};

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Default)]
struct UnitBuilder {
    start: usize,
    inputs: Vec<ObjectNode>,
    outputs: Vec<ObjectNode>,
    motion: Option<MotionNode>,
    current: Option<ObjectNode>,
}

impl UnitBuilder {
    fn is_empty(&self) -> bool {
        self.current.is_none() && self.motion.is_none() && self.inputs.is_empty()
    }

    fn flush(&mut self) {
        if let Some(obj) = self.current.take() {
            if self.motion.is_some() {
                self.outputs.push(obj);
            } else {
                self.inputs.push(obj);
            }
        }
    }

    fn finish(mut self, line: usize) -> Result<FunctionalUnit> {
        self.flush();
        let motion = self
            .motion
            .ok_or_else(|| syntax(line, "functional unit has no motion line"))?;
        if self.inputs.is_empty() {
            return Err(syntax(line, "functional unit has no input objects"));
        }
        if self.outputs.is_empty() {
            return Err(syntax(line, "functional unit has no output objects"));
        }
        FunctionalUnit::new(self.inputs, motion, self.outputs).map_err(|e| syntax(line, e.to_string()))
    }
}

pub fn parse_subgraph(text: &str) -> Result<Subgraph> {
    parse_subgraph_named("", text)
}

pub fn parse_subgraph_named(name: &str, text: &str) -> Result<Subgraph> {
    let mut units = Vec::new();
    let mut unit = UnitBuilder::default();
    let mut last_line = 0;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        last_line = line_no;
        if unit.is_empty() {
            unit.start = line_no;
        }
        if raw.trim_end() == "//" {
            let done = std::mem::take(&mut unit);
            units.push(done.finish(line_no)?);
            continue;
        }
        let (tag, value) = raw
            .split_once('\t')
            .ok_or_else(|| syntax(line_no, format!("malformed line `{raw}`")))?;
        match tag {
            "O" => {
                unit.flush();
                let obj = ObjectNode::new(value).map_err(|e| syntax(line_no, e.to_string()))?;
                unit.current = Some(obj);
            }
            "S" | "I" => {
                if value.trim().is_empty() {
                    return Err(syntax(line_no, "empty state or ingredient"));
                }
                let obj = unit
                    .current
                    .as_mut()
                    .ok_or_else(|| syntax(line_no, format!("`{tag}` line outside an object node")))?;
                if tag == "S" {
                    obj.add_state(value);
                } else {
                    obj.add_ingredient(value);
                }
            }
            "M" => {
                if unit.motion.is_some() {
                    return Err(syntax(line_no, "functional unit has two motion lines"));
                }
                unit.flush();
                let motion = MotionNode::new(value).map_err(|e| syntax(line_no, e.to_string()))?;
                unit.motion = Some(motion);
            }
            _ => return Err(syntax(line_no, format!("unknown record type `{tag}`"))),
        }
    }

    if !unit.is_empty() {
        return Err(syntax(
            last_line.max(unit.start),
            "functional unit not terminated by `//`",
        ));
    }
    if units.is_empty() {
        return Err(Error::NoUnits);
    }
    Ok(Subgraph::new(name, units))
}

/// Reads a subgraph file, naming it after the file stem.
pub fn read_subgraph(path: &Path) -> Result<Subgraph> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_subgraph_named(&name, &text)
}

/// Canonical text form. States and ingredients come out sorted; the subgraph
/// name is not part of the format.
pub fn write_subgraph(sg: &Subgraph) -> String {
    let mut out = String::new();
    for unit in &sg.units {
        for input in unit.inputs() {
            write_object(&mut out, input);
        }
        let _ = writeln!(out, "M\t{}", unit.motion().label());
        for output in unit.outputs() {
            write_object(&mut out, output);
        }
        out.push_str("//\n");
    }
    out
}

fn write_object(out: &mut String, obj: &ObjectNode) {
    let _ = writeln!(out, "O\t{}", obj.label());
    for s in obj.states() {
        let _ = writeln!(out, "S\t{s}");
    }
    for i in obj.ingredients() {
        let _ = writeln!(out, "I\t{i}");
    }
}

/// Objects available in the environment, compared by identity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KitchenInventory {
    items: BTreeSet<ObjectKey>,
}

impl KitchenInventory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: &ObjectNode) -> bool {
        self.items.insert(node.identity())
    }

    pub fn insert_key(&mut self, key: ObjectKey) -> bool {
        self.items.insert(key)
    }

    pub fn contains(&self, key: &ObjectKey) -> bool {
        self.items.contains(key)
    }

    pub fn has(&self, node: &ObjectNode) -> bool {
        self.contains(&node.identity())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectKey> {
        self.items.iter()
    }
}

impl<'a> FromIterator<&'a ObjectNode> for KitchenInventory {
    fn from_iter<T: IntoIterator<Item = &'a ObjectNode>>(iter: T) -> Self {
        let mut k = KitchenInventory::new();
        for node in iter {
            k.insert(node);
        }
        k
    }
}

/// Parses one `label{states}[ingredients]` item.
pub fn parse_item(text: &str) -> std::result::Result<ObjectNode, String> {
    let text = text.trim();
    let label_end = text.find(['{', '[']).unwrap_or(text.len());
    let mut node = ObjectNode::new(text[..label_end].trim()).map_err(|e| e.to_string())?;
    let mut rest = &text[label_end..];

    if let Some(body) = rest.strip_prefix('{') {
        let close = body.find('}').ok_or("unclosed `{`")?;
        for state in split_list(&body[..close]) {
            node.add_state(state);
        }
        rest = &body[close + 1..];
    }
    if let Some(body) = rest.strip_prefix('[') {
        let close = body.find(']').ok_or("unclosed `[`")?;
        for ingredient in split_list(&body[..close]) {
            node.add_ingredient(ingredient);
        }
        rest = &body[close + 1..];
    }
    if !rest.trim().is_empty() {
        return Err(format!("unexpected trailing text `{}`", rest.trim()));
    }
    Ok(node)
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

/// One item per line; blank lines and `#` comments are skipped and
/// duplicates collapse.
pub fn parse_kitchen(text: &str) -> Result<KitchenInventory> {
    let mut kitchen = KitchenInventory::new();
    for (idx, line) in text.split('\n').enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let node = parse_item(trimmed).map_err(|m| syntax(idx + 1, m))?;
        kitchen.insert(&node);
    }
    Ok(kitchen)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STIR: &str = "\
# stirring sugar into tea
O\ttea cup
S\tcontains
I\ttea
I\tsugar
O\tspoon
M\tstir
O\ttea cup
S\tcontains
I\tsweet tea
O\tsweet tea
S\tmixed
O\tspoon
S\twet
//
";

    #[test]
    fn parses_stir_unit() {
        let sg = parse_subgraph(STIR).unwrap();
        assert_eq!(sg.units.len(), 1);
        let u = &sg.units[0];
        assert_eq!(u.inputs().len(), 2);
        assert_eq!(u.outputs().len(), 3);
        assert_eq!(u.motion().label(), "stir");
        assert_eq!(u.inputs()[0].ingredients().len(), 2);
    }

    #[test]
    fn empty_file_has_no_units() {
        assert!(matches!(parse_subgraph(""), Err(Error::NoUnits)));
        assert!(matches!(parse_subgraph("# only a comment\n"), Err(Error::NoUnits)));
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Syntax { line, .. } => line,
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse_subgraph("O\tcup\nX\tbad\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_subgraph("S\tdiced\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_subgraph("O\tcup\nO\tlid\n//\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_subgraph("M\tstir\nO\tcup\n//\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_subgraph("O\tcup\nM\tstir\n//\n").unwrap_err()), 3);
        assert_eq!(
            line_of(parse_subgraph("O\tcup\nM\tstir\nM\tpour\nO\tcup\n//\n").unwrap_err()),
            3
        );
        assert_eq!(line_of(parse_subgraph("O\tcup\nM\tstir\nO\tcup\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_subgraph("O\t \nM\tstir\nO\tcup\n//\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_subgraph("O cup\n").unwrap_err()), 1);
    }

    #[test]
    fn writer_sorts_and_is_a_fixpoint() {
        let sg = parse_subgraph(STIR).unwrap();
        let once = write_subgraph(&sg);
        assert!(once.contains("I\tsugar\nI\ttea\n"));
        assert!(once.ends_with("//\n") && !once.ends_with("\n\n"));
        let reparsed = parse_subgraph(&once).unwrap();
        assert_eq!(reparsed, sg);
        assert_eq!(write_subgraph(&reparsed), once);
    }

    #[test]
    fn items_and_kitchen() {
        let n = parse_item("tea cup{contains}[tea, sugar]").unwrap();
        assert_eq!(n.label(), "tea cup");
        assert_eq!(n.states().len(), 1);
        assert_eq!(n.ingredients().len(), 2);
        assert_eq!(parse_item("spoon").unwrap().label(), "spoon");
        assert_eq!(parse_item("water[ ]").unwrap().ingredients().len(), 0);
        assert!(parse_item("{hot}").is_err());
        assert!(parse_item("pot{hot").is_err());
        assert!(parse_item("pot[a]{hot}").is_err());

        let k = parse_kitchen("spoon\n# comment\n\nSpoon \nwater{cold}\n").unwrap();
        assert_eq!(k.len(), 2);
        assert!(k.has(&ObjectNode::new("spoon").unwrap()));
        assert!(matches!(
            parse_kitchen("ok\n{bad}\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }
}
