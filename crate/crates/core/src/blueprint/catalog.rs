//! The knapsack and assignment blueprints, built by decomposition from their
//! one-task starting points.

use crate::agents::Role;

use super::{
    create_blueprint, embed_sub_blueprint, Blueprint, DecompositionStep, Edge, IterationBound,
    Node, Protocol, SchemaRegistry, TaskSpec,
};

pub fn ksp_task() -> TaskSpec {
    TaskSpec::new("ksp", "ksp_instance", "ksp_answer", "ksp.optimal_value")
}

pub fn tap_task() -> TaskSpec {
    TaskSpec::new("tap", "tap_instance", "tap_answer", "tap.optimal_cost")
}

/// Leaf task spec for one agent role. The requirement identifier is resolved
/// by [`crate::agents::requirement::satisfies`].
pub fn role_task(role: Role) -> TaskSpec {
    let (input, output, requirement) = match role {
        Role::Worker => ("worker_request", "worker_response", "worker.expand"),
        Role::Trimmer => ("trimmer_request", "trimmer_response", "trimmer.filter"),
        Role::KspReporter => ("state_set", "ksp_answer", "ksp_reporter.max_value"),
        Role::RowReducer => ("matrix_request", "reduced_matrix", "row_reducer.row_minima"),
        Role::ColReducer => ("matrix_request", "reduced_matrix", "col_reducer.column_minima"),
        Role::Matcher => ("matrix_request", "matcher_response", "matcher.max_independent_zeros"),
        Role::Painter => ("painter_request", "cover_response", "painter.min_line_cover"),
        Role::Normalizer => ("normalizer_request", "normalizer_response", "normalizer.shift_uncovered"),
        Role::TapReporter => ("tap_report_request", "tap_report_response", "tap_reporter.sum"),
        Role::CoverSeeker => ("matrix_request", "cover_response", "cover_seeker.min_line_cover"),
    };
    TaskSpec::new(role.name(), input, output, requirement)
}

fn blueprint(roles: &[Role], nodes: Vec<Node>, edges: Vec<Edge>) -> Blueprint {
    Blueprint::from_parts(
        roles.iter().map(|&r| role_task(r)).collect(),
        Protocol { nodes, edges },
    )
}

/// Worker / Trimmer / Reporter loop over the items.
pub fn ksp_decomposition() -> DecompositionStep {
    let nodes = vec![
        Node::entry("ksp_instance"),
        Node::controller("init_states", "initial_state_set", "ksp_instance", "state_set"),
        Node::looping("items", "all_items_consumed", Some(IterationBound::ItemCount)),
        Node::controller("select_item", "next_item", "ksp_instance", "item_pick"),
        Node::task("worker"),
        Node::task("trimmer"),
        Node::controller("union", "state_union", "union_request", "state_set"),
        Node::task("ksp_reporter"),
        Node::exit("ksp_answer"),
    ];
    let edges = vec![
        Edge::control("entry", "init_states"),
        Edge::control("init_states", "items"),
        Edge::control("items", "select_item"),
        Edge::control("select_item", "worker"),
        Edge::control("worker", "trimmer"),
        Edge::control("trimmer", "union"),
        Edge::control("union", "items"),
        Edge::control("items", "ksp_reporter"),
        Edge::control("ksp_reporter", "exit"),
        Edge::data("entry", "select_item", "items", "items"),
        Edge::data("entry", "trimmer", "capacity", "capacity"),
        Edge::data("init_states", "worker", "c_list", "c_list"),
        Edge::data("init_states", "union", "c_list", "c_list"),
        Edge::data("select_item", "worker", "s_item", "s_item"),
        Edge::data("worker", "trimmer", "n_list", "n_list"),
        Edge::data("trimmer", "union", "t_list", "t_list"),
        Edge::data("union", "worker", "c_list", "c_list"),
        Edge::data("union", "ksp_reporter", "c_list", "c_list"),
        Edge::data("ksp_reporter", "exit", "max_value", "max_value"),
    ];
    DecompositionStep {
        replaced_task: "ksp".into(),
        sub_blueprint: blueprint(&[Role::Worker, Role::Trimmer, Role::KspReporter], nodes, edges),
        annotation: Some(
            "each agent handles one expansion, one filter or one maximum over a single state set"
                .into(),
        ),
    }
}

/// Reductions followed by the cover / normalize loop with a lone cover seeker.
pub fn tap_legacy_decomposition() -> DecompositionStep {
    let nodes = vec![
        Node::entry("tap_instance"),
        Node::task("row_reducer"),
        Node::task("col_reducer"),
        Node::looping("improve", "cover_size_equals_n", Some(IterationBound::SquaredSize)),
        Node::task("cover_seeker"),
        Node::task("normalizer"),
        Node::task("tap_reporter"),
        Node::exit("tap_answer"),
    ];
    let edges = vec![
        Edge::control("entry", "row_reducer"),
        Edge::control("row_reducer", "col_reducer"),
        Edge::control("col_reducer", "improve"),
        Edge::control("improve", "cover_seeker"),
        Edge::control("cover_seeker", "normalizer"),
        Edge::control("normalizer", "improve"),
        Edge::control("improve", "tap_reporter"),
        Edge::control("tap_reporter", "exit"),
        Edge::data("entry", "row_reducer", "cost_matrix", "matrix"),
        Edge::data("row_reducer", "col_reducer", "reduced_matrix", "matrix"),
        Edge::data("col_reducer", "cover_seeker", "reduced_matrix", "matrix"),
        Edge::data("col_reducer", "normalizer", "reduced_matrix", "matrix"),
        Edge::data("normalizer", "cover_seeker", "normalized_matrix", "matrix"),
        Edge::data("cover_seeker", "normalizer", "collum_collection", "collumn_collection"),
        Edge::data("cover_seeker", "normalizer", "row_collection", "row_collection"),
        Edge::data("entry", "tap_reporter", "cost_matrix", "matrix"),
        Edge::data("tap_reporter", "exit", "total_value", "optimal_cost"),
    ];
    DecompositionStep {
        replaced_task: "tap".into(),
        sub_blueprint: blueprint(
            &[
                Role::RowReducer,
                Role::ColReducer,
                Role::CoverSeeker,
                Role::Normalizer,
                Role::TapReporter,
            ],
            nodes,
            edges,
        ),
        annotation: Some("one Hungarian step per agent".into()),
    }
}

/// Splits the cover seeker into a matcher and a painter.
pub fn cover_seeker_decomposition() -> DecompositionStep {
    let nodes = vec![
        Node::entry("matrix_request"),
        Node::task("matcher"),
        Node::task("painter"),
        Node::exit("cover_response"),
    ];
    let edges = vec![
        Edge::control("entry", "matcher"),
        Edge::control("matcher", "painter"),
        Edge::control("painter", "exit"),
        Edge::data("entry", "matcher", "matrix", "matrix"),
        Edge::data("entry", "painter", "matrix", "matrix"),
        Edge::data("matcher", "painter", "largest_collection", "collection"),
        Edge::data("painter", "exit", "collum_collection", "collum_collection"),
        Edge::data("painter", "exit", "row_collection", "row_collection"),
    ];
    DecompositionStep {
        replaced_task: "cover_seeker".into(),
        sub_blueprint: blueprint(&[Role::Matcher, Role::Painter], nodes, edges),
        annotation: Some(
            "finding independent zeros and covering them given those zeros are each easier than a direct minimum cover"
                .into(),
        ),
    }
}

pub fn ksp_blueprint() -> Blueprint {
    let registry = SchemaRegistry::standard();
    let root = create_blueprint(ksp_task(), &registry).expect("standard schemas");
    embed_sub_blueprint(&root, &ksp_decomposition()).expect("catalog splice")
}

/// Five agents: row/column reducers, cover seeker, normalizer, reporter.
pub fn tap_legacy_blueprint() -> Blueprint {
    let registry = SchemaRegistry::standard();
    let root = create_blueprint(tap_task(), &registry).expect("standard schemas");
    embed_sub_blueprint(&root, &tap_legacy_decomposition()).expect("catalog splice")
}

/// Six agents. The final matching is also handed to the reporter.
pub fn tap_blueprint() -> Blueprint {
    embed_sub_blueprint(&tap_legacy_blueprint(), &cover_seeker_decomposition())
        .expect("catalog splice")
        .with_edge(Edge::data("matcher", "tap_reporter", "largest_collection", "collection"))
}

/// Roles a pipeline calls, in blueprint order.
pub fn required_roles(b: &Blueprint) -> Vec<Role> {
    b.tasks().iter().filter_map(|t| t.id.parse().ok()).collect()
}
