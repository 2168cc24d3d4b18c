use sndp_core::{generate, solve, Family, GeneratorSpec, Kind};

const GRID_2X2_SEED_7: &str = include_str!("golden/grid_2x2_seed7.json");

#[test]
fn grid_2x2_seed_7_matches_golden_file() {
    let spec = GeneratorSpec::new(Family::Grid, 4, 1, 2, Kind::Ec, 7);
    let inst = generate(&spec).unwrap();
    assert_eq!(inst.to_json().trim(), GRID_2X2_SEED_7.trim());
    assert_eq!(inst.graph.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
}

#[test]
fn grid_2x2_seed_7_solution() {
    let inst = generate(&GeneratorSpec::new(Family::Grid, 4, 1, 2, Kind::Ec, 7)).unwrap();
    // demand (1,3) of 2: the direct edge plus the path through 0 and 2
    let report = solve(&inst).unwrap();
    assert_eq!(report.solution.to_vec(), vec![0, 1, 2, 3]);
    assert_eq!(report.weight, 16 + 73);
}
