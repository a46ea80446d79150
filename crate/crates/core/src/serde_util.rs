//! Serde adapters that write nalgebra vectors and matrices as plain JSON arrays
//! (matrices row-major).

pub mod dvec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Ok(DVector::from_vec(v))
    }
}

pub mod dvec_list {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[DVector<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DVector<f64>>, D::Error> {
        let v = Vec::<Vec<f64>>::deserialize(d)?;
        Ok(v.into_iter().map(DVector::from_vec).collect())
    }
}

pub mod dmat {
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }
}
