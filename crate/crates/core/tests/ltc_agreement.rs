mod common;

use common::{counter_window, runs_by_expansion, runs_by_progression};
use logiviz::ltc;

#[test]
fn progression_matches_expansion() {
    let p = counter_window();
    let lt = ltc::split_ltc(&p.theories["T"]).unwrap();
    let a = runs_by_expansion(&p, &lt, 3);
    let b = runs_by_progression(&p, &lt, 3);
    // By hand: from count 0, 1, 2 there are 6, 8, 6 consistent action sets,
    // with transition counts [[2,3,1],[3,2,3],[1,3,2]]; three steps from 0 give 282.
    assert_eq!(a.len(), 282);
    assert_eq!(a, b);
}
