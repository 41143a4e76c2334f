//! The four extraction prompt templates and slot substitution.
//!
//! Template wording is fixed; rendering substitutes named `[slot]` markers
//! and nothing else. The `[input diagram]` slot is special: images travel as
//! attached payloads on the request, not as text, so the marker substitutes
//! to its caption text (usually empty).

use std::collections::BTreeMap;

use crate::error::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptId {
    P1Plantuml,
    P2Rules,
    P3Graph,
    P4Query,
}

#[derive(Debug, Clone, Copy)]
pub struct PromptTemplate {
    pub id: PromptId,
    pub system: &'static str,
    pub user: &'static str,
}

pub const P1_PLANTUML: PromptTemplate = PromptTemplate {
    id: PromptId::P1Plantuml,
    system: "You are generating PlantUml activity diagram about RISC-V supply chain processes without comments and without explanations. Activity diagram should support multiple swimlanes and interaction between actors.",
    user: "Update given PlantUML diagram [PlantUML activity diagram text] based on given [textual description]/[input diagram].",
};

pub const P2_RULES: PromptTemplate = PromptTemplate {
    id: PromptId::P2Rules,
    system: "",
    user: "For given rules: [textual rules] and activity diagram: [PlantUML activity diagram text], generate list of rules mapped to appropriate ordering constraints: before, after, after-true, after-false. Identitfy activities (A) and roles for included activities (as R:A).",
};

pub const P3_GRAPH: PromptTemplate = PromptTemplate {
    id: PromptId::P3Graph,
    system: "You are generating Neo4j model about supply chain key elements - stakeholders, products, their relationships and attributes - no comments, delimiters and explanations. Just extract node labels, properties and relationships, without constriants and indices. Example of simple output is given as [example knowledge graph model].",
    user: "Update given knowledge graph model [Neo4j graph model] based on given [textual description]/[input diagram].",
};

pub const P4_QUERY: PromptTemplate = PromptTemplate {
    id: PromptId::P4Query,
    system: "",
    user: "Generate a Cypher query from the [user text] using the provided Neo4j schema [current graph schema].",
};

/// Example knowledge-graph model referenced by the graph-extraction prompt;
/// a small reconstruction (three nodes, two relationships).
pub const EXAMPLE_GRAPH_MODEL: &str = "CREATE (vendor:Company {name: \"Vendor\"})\nCREATE (fab:Company:Foundry {name: \"Fab\"})\nCREATE (chip:Product {name: \"Chip\"})\nCREATE (vendor)-[:DESIGNS]->(chip)\nCREATE (fab)-[:FABRICATES]->(chip)";

/// The image-slot marker, substituted separately from text slots.
pub const INPUT_DIAGRAM_SLOT: &str = "input diagram";

/// Slot values for rendering. Text slots substitute in place; an image slot
/// attaches a payload to the request.
#[derive(Debug, Clone, Default)]
pub struct Slots {
    values: BTreeMap<String, String>,
    image: Option<Vec<u8>>,
}

impl Slots {
    pub fn new() -> Self {
        Slots::default()
    }

    pub fn set(mut self, name: &str, value: impl Into<String>) -> Self {
        self.values.insert(name.to_string(), value.into());
        self
    }

    pub fn with_image(mut self, bytes: Vec<u8>) -> Self {
        self.image = Some(bytes);
        self
    }

    pub fn image(&self) -> Option<&[u8]> {
        self.image.as_deref()
    }
}

/// Substitutes every `[slot]` marker in the template. Every marker must have
/// a value, except `[input diagram]`, which defaults to empty text (the
/// payload rides on the request).
pub fn render_prompt(
    template: &PromptTemplate,
    slots: &Slots,
) -> Result<(String, String), GatewayError> {
    Ok((
        substitute(template.system, slots)?,
        substitute(template.user, slots)?,
    ))
}

fn substitute(text: &str, slots: &Slots) -> Result<String, GatewayError> {
    let mut out = String::new();
    let mut rest = text;
    while let Some(open) = rest.find('[') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let Some(close) = after.find(']') else {
            out.push('[');
            rest = after;
            continue;
        };
        let name = &after[..close];
        match slots.values.get(name) {
            Some(value) => out.push_str(value),
            None if name == INPUT_DIAGRAM_SLOT => {}
            None => return Err(GatewayError::MissingSlot(name.to_string())),
        }
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_user_text_begins_with_the_update_instruction() {
        let slots = Slots::new()
            .set("PlantUML activity diagram text", "")
            .set("textual description", "a supply chain");
        let (system, user) = render_prompt(&P1_PLANTUML, &slots).unwrap();
        assert!(user.starts_with("Update given PlantUML diagram"));
        assert!(user.contains("a supply chain"));
        assert!(system.contains("multiple swimlanes"));
    }

    #[test]
    fn p4_contains_the_generation_instruction() {
        let slots = Slots::new()
            .set("user text", "list all foundries")
            .set("current graph schema", "Node labels: Company");
        let (_, user) = render_prompt(&P4_QUERY, &slots).unwrap();
        assert!(user.contains("Generate a Cypher query"));
        assert!(user.contains("list all foundries"));
        assert!(user.contains("Node labels: Company"));
    }

    #[test]
    fn missing_slot_is_an_error() {
        let slots = Slots::new().set("current graph schema", "x");
        match render_prompt(&P4_QUERY, &slots) {
            Err(GatewayError::MissingSlot(name)) => assert_eq!(name, "user text"),
            other => panic!("expected missing slot, got {other:?}"),
        }
    }

    #[test]
    fn input_diagram_slot_is_optional() {
        let slots = Slots::new()
            .set("PlantUML activity diagram text", "@startuml...")
            .set("textual description", "desc");
        let (_, user) = render_prompt(&P1_PLANTUML, &slots).unwrap();
        assert!(user.contains("based on given desc/."));
    }
}
