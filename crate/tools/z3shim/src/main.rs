//! Reads a full SMT-LIB2 script on stdin, evaluates it with the linked
//! z3, and prints the responses. A drop-in `--solver` command for
//! machines without a z3 binary on the PATH.

use std::ffi::{CStr, CString};
use std::io::Read;

fn main() {
    let mut script = String::new();
    std::io::stdin().read_to_string(&mut script).expect("read stdin");
    unsafe {
        let cfg = z3_sys::Z3_mk_config();
        let ctx = z3_sys::Z3_mk_context(cfg);
        let input = CString::new(script).expect("script contains a NUL byte");
        let out = z3_sys::Z3_eval_smtlib2_string(ctx, input.as_ptr());
        if !out.is_null() {
            let text = CStr::from_ptr(out).to_string_lossy();
            if !text.is_empty() {
                println!("{}", text.trim_end());
            }
        }
        z3_sys::Z3_del_context(ctx);
        z3_sys::Z3_del_config(cfg);
    }
}
