//! Runs the Python smoke test against the module inside an embedded
//! interpreter, so `cargo test` covers the bindings without a wheel build.

use std::ffi::CString;
use std::path::Path;

use medfacet::medfacet as module;
use pyo3::prelude::*;

#[test]
fn python_smoke_test() {
    pyo3::append_to_inittab!(module);
    Python::initialize();
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../python/smoke_test.py");
    Python::attach(|py| {
        let code = CString::new(format!(
            "import runpy, medfacet\nassert medfacet.__version__\nrunpy.run_path({:?}, run_name='__main__')\n",
            script.to_str().unwrap()
        ))
        .unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.display(py);
            panic!("smoke test failed: {e}");
        }
    });
}
