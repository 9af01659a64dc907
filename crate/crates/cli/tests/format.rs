use proptest::prelude::*;
use starklab::output::num;

proptest! {
    #[test]
    fn csv_numbers_round_trip_exactly(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = num(v);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
        prop_assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    }
}
