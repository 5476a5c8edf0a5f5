#pragma once

#include <string>

#include "aberrasim/optics/prescription.hpp"

namespace aberrasim {

/// Parses and strictly validates a prescription document; unknown fields
/// anywhere in the document are rejected.  Throws std::invalid_argument
/// naming the offending field.
LensPrescription<double> parse_prescription(const std::string& json_text);

/// Reads the file and parses it; throws std::runtime_error on I/O errors.
LensPrescription<double> load_prescription(const std::string& path);

/// Serializes a prescription back to its document form.
std::string prescription_to_json(const LensPrescription<double>& p);

}  // namespace aberrasim
