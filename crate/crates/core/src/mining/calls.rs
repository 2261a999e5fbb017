//! Name-and-arity call graph over one project snapshot.

use std::collections::{BTreeMap, HashSet};

use crate::java::{extract_methods, lex};
use crate::model::{CallHierarchy, MethodIdentity};

#[derive(Debug, Clone)]
struct Node {
    identity: MethodIdentity,
    name: String,
    arity: usize,
    text: String,
    tokens: usize,
    calls: HashSet<(String, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct CallGraph {
    nodes: Vec<Node>,
}

/// Number of parameters in a `(T1,T2)` signature string.
pub fn signature_arity(signature: &str) -> usize {
    let inner = signature
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')');
    if inner.trim().is_empty() {
        return 0;
    }
    let mut depth = 0i32;
    let mut n = 1;
    for c in inner.chars() {
        match c {
            '<' | '(' | '[' => depth += 1,
            '>' | ')' | ']' => depth -= 1,
            ',' if depth == 0 => n += 1,
            _ => {}
        }
    }
    n
}

impl CallGraph {
    pub fn build(project: &str, snapshot: &BTreeMap<String, String>) -> Self {
        let mut nodes = Vec::new();
        for (path, src) in snapshot {
            for m in extract_methods(src).methods {
                let text = m.text(src).to_string();
                nodes.push(Node {
                    tokens: lex(&text).0.len(),
                    identity: MethodIdentity {
                        project: project.to_string(),
                        file_path: path.clone(),
                        qualified_name: m.qualified_name,
                        signature: m.signature,
                    },
                    name: m.name,
                    arity: m.param_count,
                    text,
                    calls: m.invocations.into_iter().collect(),
                });
            }
        }
        CallGraph { nodes }
    }

    /// Token-longest caller and callee of `id`; ties go to the smaller
    /// qualified name (then file path and signature).
    pub fn hierarchy(&self, id: &MethodIdentity) -> CallHierarchy {
        let me = self.nodes.iter().find(|n| &n.identity == id);
        let key = match me {
            Some(n) => (n.name.clone(), n.arity),
            None => (id.simple_name().to_string(), signature_arity(&id.signature)),
        };
        let others = || self.nodes.iter().filter(|n| &n.identity != id);

        let caller = others().filter(|n| n.calls.contains(&key)).max_by(longest);
        let callee = me.and_then(|me| {
            others()
                .filter(|n| me.calls.contains(&(n.name.clone(), n.arity)))
                .max_by(longest)
        });
        CallHierarchy {
            longest_caller: caller.map(|n| n.text.clone()),
            longest_callee: callee.map(|n| n.text.clone()),
        }
    }
}

fn longest(a: &&Node, b: &&Node) -> std::cmp::Ordering {
    a.tokens.cmp(&b.tokens).then_with(|| {
        let ka = (
            &a.identity.qualified_name,
            &a.identity.file_path,
            &a.identity.signature,
        );
        let kb = (
            &b.identity.qualified_name,
            &b.identity.file_path,
            &b.identity.signature,
        );
        // reversed so that max_by prefers the lexicographically smaller name
        kb.cmp(&ka)
    })
}

/// Call hierarchy of `id` within one HEAD snapshot (`file path → source`).
pub fn mine_call_hierarchy(
    snapshot: &BTreeMap<String, String>,
    id: &MethodIdentity,
) -> CallHierarchy {
    CallGraph::build(&id.project, snapshot).hierarchy(id)
}
