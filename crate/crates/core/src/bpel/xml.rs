use crate::error::{Error, Result};
use crate::rules::expr::{read_wrapped, write_wrapped};
use crate::xml::{parse_document, split_list, Element, XmlWriter};

use super::{Activity, BpelProcess, IfActivity, PartnerLink, TaskCall};

/// Canonical document: partner links, variables, then the body.
pub fn serialize_bpel(process: &BpelProcess) -> String {
    let mut w = XmlWriter::new();
    w.open("process", &[("name", &process.name)]);
    if process.partner_links.is_empty() {
        w.empty("partnerLinks", &[]);
    } else {
        w.open("partnerLinks", &[]);
        for link in &process.partner_links {
            let mut attrs = vec![("name", link.name.as_str()), ("family", link.family.as_str())];
            if let Some(provider) = &link.provider {
                attrs.push(("provider", provider));
            }
            w.empty("partnerLink", &attrs);
        }
        w.close("partnerLinks");
    }
    if process.variables.is_empty() {
        w.empty("variables", &[]);
    } else {
        w.open("variables", &[]);
        for var in &process.variables {
            w.empty("variable", &[("name", var)]);
        }
        w.close("variables");
    }
    write_activity(&mut w, &process.body);
    w.close("process");
    w.finish()
}

fn write_activity(w: &mut XmlWriter, activity: &Activity) {
    match activity {
        Activity::Sequence(children) | Activity::Flow(children) => {
            let name = activity.element_name();
            if children.is_empty() {
                w.empty(name, &[]);
                return;
            }
            w.open(name, &[]);
            children.iter().for_each(|c| write_activity(w, c));
            w.close(name);
        }
        Activity::If(branch) => {
            let mut attrs = vec![("name", branch.name.as_str())];
            if let Some(rule) = &branch.rule {
                attrs.push(("rule", rule));
            }
            w.open("if", &attrs);
            write_wrapped(w, "condition", &branch.condition);
            w.open("then", &[]);
            write_activity(w, &branch.then);
            w.close("then");
            if let Some(otherwise) = &branch.otherwise {
                w.open("else", &[]);
                write_activity(w, otherwise);
                w.close("else");
            }
            w.close("if");
        }
        Activity::Invoke(call) => {
            let inputs = call.inputs.join(",");
            let outputs = call.outputs.join(",");
            let mut attrs = call_attrs(call);
            if !inputs.is_empty() {
                attrs.push(("inputVariable", &inputs));
            }
            if !outputs.is_empty() {
                attrs.push(("outputVariable", &outputs));
            }
            w.empty("invoke", &attrs);
        }
        Activity::Receive(call) | Activity::Reply(call) => {
            let vars = match activity {
                Activity::Receive(_) => call.outputs.join(","),
                _ => call.inputs.join(","),
            };
            let mut attrs = call_attrs(call);
            if !vars.is_empty() {
                attrs.push(("variable", &vars));
            }
            w.empty(activity.element_name(), &attrs);
        }
        Activity::Fault { name } => w.empty("fault", &[("name", name)]),
        Activity::Empty => w.empty("empty", &[]),
    }
}

fn call_attrs(call: &TaskCall) -> Vec<(&str, &str)> {
    vec![
        ("name", call.name.as_str()),
        ("partnerLink", call.partner_link.as_str()),
        ("operation", call.operation.as_str()),
    ]
}

/// Parses and validates a process document.
pub fn parse_bpel(text: &str) -> Result<BpelProcess> {
    let root = parse_document(text)?;
    if root.name != "process" {
        return Err(Error::UnknownElement(root.name));
    }
    root.expect_no_text()?;
    let name = root.required("name")?.to_string();
    let (links, vars, body) = match root.children.as_slice() {
        [links, vars, body] if links.name == "partnerLinks" && vars.name == "variables" => (links, vars, body),
        _ => {
            return Err(Error::SchemaViolation(
                "process must contain partnerLinks, variables and one activity, in that order".into(),
            ))
        }
    };
    let partner_links = links
        .children
        .iter()
        .map(|l| {
            expect_leaf(l, "partnerLink")?;
            Ok(PartnerLink {
                name: l.required("name")?.to_string(),
                family: l.required("family")?.to_string(),
                provider: l.attr("provider").map(str::to_string),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let variables = vars
        .children
        .iter()
        .map(|v| {
            expect_leaf(v, "variable")?;
            Ok(v.required("name")?.to_string())
        })
        .collect::<Result<Vec<_>>>()?;
    let process = BpelProcess {
        name,
        partner_links,
        variables,
        body: read_activity(body)?,
    };
    process.validate()?;
    Ok(process)
}

fn expect_leaf(element: &Element, name: &str) -> Result<()> {
    if element.name != name {
        return Err(Error::UnknownElement(element.name.clone()));
    }
    element.expect_no_text()?;
    match element.children.first() {
        Some(child) => Err(Error::UnknownElement(child.name.clone())),
        None => Ok(()),
    }
}

fn read_call(element: &Element) -> Result<TaskCall> {
    expect_leaf(element, &element.name)?;
    let (inputs, outputs) = match element.name.as_str() {
        "invoke" => (
            split_list(element.attr("inputVariable")),
            split_list(element.attr("outputVariable")),
        ),
        "receive" => (Vec::new(), split_list(element.attr("variable"))),
        _ => (split_list(element.attr("variable")), Vec::new()),
    };
    Ok(TaskCall {
        name: element.required("name")?.to_string(),
        partner_link: element.required("partnerLink")?.to_string(),
        operation: element.required("operation")?.to_string(),
        inputs,
        outputs,
    })
}

fn read_activity(element: &Element) -> Result<Activity> {
    element.expect_no_text()?;
    match element.name.as_str() {
        "sequence" | "flow" => {
            let children = element
                .children
                .iter()
                .map(read_activity)
                .collect::<Result<Vec<_>>>()?;
            Ok(if element.name == "sequence" {
                Activity::Sequence(children)
            } else {
                Activity::Flow(children)
            })
        }
        "if" => {
            let (condition, then, otherwise) = match element.children.as_slice() {
                [c, t] => (c, t, None),
                [c, t, e] => (c, t, Some(e)),
                _ => return Err(Error::SchemaViolation("if needs condition, then and an optional else".into())),
            };
            if condition.name != "condition" || then.name != "then" || otherwise.is_some_and(|e| e.name != "else") {
                return Err(Error::SchemaViolation("if children must be condition, then, else".into()));
            }
            Ok(Activity::If(IfActivity {
                name: element.required("name")?.to_string(),
                rule: element.attr("rule").map(str::to_string),
                condition: read_wrapped(condition)?,
                then: Box::new(read_single(then)?),
                otherwise: otherwise.map(read_single).transpose()?.map(Box::new),
            }))
        }
        "invoke" => Ok(Activity::Invoke(read_call(element)?)),
        "receive" => Ok(Activity::Receive(read_call(element)?)),
        "reply" => Ok(Activity::Reply(read_call(element)?)),
        "fault" => {
            expect_leaf(element, "fault")?;
            Ok(Activity::Fault {
                name: element.required("name")?.to_string(),
            })
        }
        "empty" => {
            expect_leaf(element, "empty")?;
            Ok(Activity::Empty)
        }
        other => Err(Error::UnknownElement(other.to_string())),
    }
}

fn read_single(element: &Element) -> Result<Activity> {
    element.expect_no_text()?;
    match element.children.as_slice() {
        [only] => read_activity(only),
        _ => Err(Error::SchemaViolation(format!("<{}> must contain exactly one activity", element.name))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"<process name="Booking">
  <partnerLinks>
    <partnerLink name="AgencyPL" family="Agency" provider="agency-1"/>
  </partnerLinks>
  <variables>
    <variable name="order"/>
  </variables>
  <sequence>
    <receive name="Order" partnerLink="AgencyPL" operation="order" variable="order"/>
    <if name="G" rule="G">
      <condition>
        <var path="order.valid"/>
      </condition>
      <then>
        <invoke name="Notify" partnerLink="AgencyPL" operation="notify" inputVariable="order"/>
      </then>
      <else>
        <fault name="G.fault"/>
      </else>
    </if>
  </sequence>
</process>
"#;

    #[test]
    fn canonical_document_round_trips_byte_exact() {
        let process = parse_bpel(SMALL).unwrap();
        assert!(process.is_executable());
        assert_eq!(serialize_bpel(&process), SMALL);
    }

    #[test]
    fn undeclared_variable_is_a_schema_violation() {
        let text = SMALL.replace(r#"inputVariable="order""#, r#"inputVariable="ghost""#);
        assert!(matches!(parse_bpel(&text), Err(Error::SchemaViolation(_))));
    }

    #[test]
    fn structural_violations() {
        let text = SMALL.replace(r#"partnerLink="AgencyPL" operation="notify""#, r#"partnerLink="Nope" operation="notify""#);
        assert!(matches!(parse_bpel(&text), Err(Error::SchemaViolation(_))));
        let text = SMALL.replace(r#"<fault name="G.fault"/>"#, r#"<fault name="Order"/>"#);
        assert!(matches!(parse_bpel(&text), Err(Error::SchemaViolation(_))));
        let text = SMALL.replace("<empty/>", "").replace(r#"<fault name="G.fault"/>"#, "<sequence></sequence>");
        assert!(matches!(parse_bpel(&text), Err(Error::SchemaViolation(_))));
        let text = SMALL.replace("<fault", "<throw");
        assert!(matches!(parse_bpel(&text), Err(Error::UnknownElement(_))));
        assert!(matches!(parse_bpel("<process"), Err(Error::XmlSyntax(_))));
    }
}
