pub mod numeric;
pub mod para;
pub mod forms;
pub mod kawamata;
pub mod pushforward;
pub mod ma;
