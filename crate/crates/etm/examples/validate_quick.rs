//! Run the acceptance battery at reduced sample sizes and print one line per criterion.
//!
//! ```bash
//! cargo run --release -p etm --example validate_quick
//! ```

use etm::validation::{run_suite, Suite};

fn main() {
    for outcome in run_suite(Suite::Quick, None, 20180101) {
        println!("{}", outcome.summary());
    }
}
