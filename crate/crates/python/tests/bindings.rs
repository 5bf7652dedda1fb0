use pyo3::prelude::*;
use pyo3::ffi::c_str;
use symext_py::symext_py as bindings;

fn run(code: &std::ffi::CStr) {
    pyo3::append_to_inittab!(bindings);
    Python::attach(|py| {
        if let Err(e) = py.run(code, None, None) {
            e.display(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn module_round_trip() {
    run(c_str!(
        r#"
import math
import symext_py as sx

bell = sx.DensityMatrix.phi_plus()
assert bell.dims == [2, 2]
assert abs(sx.chsh_value(bell).value - 2 * math.sqrt(2)) < 1e-9
assert sx.verdict_qubit(sx.DensityMatrix.werner(0.5)) == "Extendible_ChenCriterion"

mixed = sx.DensityMatrix.maximally_mixed([3, 3])
assert sx.cglmp_max(mixed, restarts=2).value < 1e-8
assert sx.verdict_qutrit(mixed, restarts=2)[0] == "Inconclusive"

try:
    sx.DensityMatrix([[1, 0], [0, 1]], [2])
except ValueError as e:
    assert "trace" in str(e)
else:
    raise AssertionError("bad trace accepted")

try:
    sx.load_state("/nonexistent/state.json")
except OSError:
    pass
else:
    raise AssertionError("missing file accepted")

amps = sx.gamma_state("psi1", 0.0)
assert abs(amps[0] - 1 / math.sqrt(8)) < 1e-15
"#
    ));
}
