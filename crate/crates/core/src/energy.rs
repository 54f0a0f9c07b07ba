//! First-order radio energy model and per-node battery ledger.
//!
//! Transmitting `k` bits over `d` meters costs `e_elec*k + eps_amp*k*d^2`;
//! receiving costs `e_elec*k`. A battery tracks what it has spent per
//! category so that `initial == residual + tx + rx + ctrl` holds at all times.

use thiserror::Error;

/// Energy-per-bit constants and packet sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    /// Electronics cost, J/bit, paid on both transmit and receive.
    pub e_elec: f64,
    /// Amplifier cost, J/bit/m^2.
    pub eps_amp: f64,
    pub data_bits: u64,
    pub ctrl_bits: u64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self {
            e_elec: 50e-9,
            eps_amp: 100e-12,
            data_bits: 2000,
            ctrl_bits: 64,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("radio constants must be positive and finite")]
    BadConstants,
    #[error("packet sizes must be positive with ctrl_bits <= data_bits")]
    BadPacketSizes,
    #[error("attempted to drain a dead battery")]
    DrainDead,
    #[error("drain amount must be finite and non-negative (got {0})")]
    BadAmount(f64),
}

impl RadioModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.e_elec) && ok(self.eps_amp)) {
            return Err(EnergyError::BadConstants);
        }
        if self.data_bits == 0 || self.ctrl_bits == 0 || self.ctrl_bits > self.data_bits {
            return Err(EnergyError::BadPacketSizes);
        }
        Ok(())
    }

    pub fn tx_cost(&self, bits: u64, d: f64) -> f64 {
        let k = bits as f64;
        self.e_elec * k + self.eps_amp * k * d * d
    }

    pub fn rx_cost(&self, bits: u64) -> f64 {
        self.e_elec * bits as f64
    }
}

/// Ledger bucket a drain is booked under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Tx,
    Rx,
    Ctrl,
}

/// Result of a drain attempt on a live battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drain {
    /// Energy was spent; the node is still alive.
    Spent,
    /// Energy was spent and residual reached exactly zero; the node is now dead.
    Exhausted,
    /// Not enough energy: nothing was spent and the node is now dead.
    Failed,
}

impl Drain {
    pub fn succeeded(self) -> bool {
        !matches!(self, Drain::Failed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    initial: f64,
    residual: f64,
    alive: bool,
    spent_tx: f64,
    spent_rx: f64,
    spent_ctrl: f64,
}

impl Battery {
    pub fn new(initial: f64) -> Self {
        Self {
            initial,
            residual: initial,
            alive: true,
            spent_tx: 0.0,
            spent_rx: 0.0,
            spent_ctrl: 0.0,
        }
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn spent_tx(&self) -> f64 {
        self.spent_tx
    }

    pub fn spent_rx(&self) -> f64 {
        self.spent_rx
    }

    pub fn spent_ctrl(&self) -> f64 {
        self.spent_ctrl
    }

    pub fn spent_total(&self) -> f64 {
        self.spent_tx + self.spent_rx + self.spent_ctrl
    }

    /// Spends `amount` joules under `category`.
    ///
    /// A node that cannot afford the whole amount dies without spending
    /// anything; its residual stays frozen at the pre-attempt value.
    pub fn drain(&mut self, amount: f64, category: Category) -> Result<Drain, EnergyError> {
        if !self.alive {
            return Err(EnergyError::DrainDead);
        }
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(EnergyError::BadAmount(amount));
        }
        if amount > self.residual {
            self.alive = false;
            return Ok(Drain::Failed);
        }
        self.residual -= amount;
        match category {
            Category::Tx => self.spent_tx += amount,
            Category::Rx => self.spent_rx += amount,
            Category::Ctrl => self.spent_ctrl += amount,
        }
        if self.residual == 0.0 {
            self.alive = false;
            Ok(Drain::Exhausted)
        } else {
            Ok(Drain::Spent)
        }
    }

    /// Relative violation of `initial == residual + spent`.
    pub fn ledger_error(&self) -> f64 {
        (self.initial - self.residual - self.spent_total()).abs() / self.initial
    }
}
