/*!
  \file error.hpp
  \brief Error type shared by all lutcnn modules
*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lutcnn
{

/*! \brief Error classes surfaced by the toolchain.
 *
 * The CLI maps each class to its own nonzero exit status.
 */
enum class error_kind
{
  domain = 1,
  parse,
  state,
  structure,
  capacity,
  numeric,
  input,
  io
};

inline std::string_view to_string( error_kind kind )
{
  switch ( kind )
  {
  case error_kind::domain:
    return "domain error";
  case error_kind::parse:
    return "parse error";
  case error_kind::state:
    return "state error";
  case error_kind::structure:
    return "structure error";
  case error_kind::capacity:
    return "capacity error";
  case error_kind::numeric:
    return "numeric error";
  case error_kind::input:
    return "input error";
  case error_kind::io:
    return "io error";
  }
  return "error";
}

class error : public std::runtime_error
{
public:
  error( error_kind kind, std::string module, std::string const& message )
      : std::runtime_error( "[" + module + "] " + std::string( to_string( kind ) ) + ": " + message ),
        kind_( kind ),
        module_( std::move( module ) )
  {
  }

  error_kind kind() const noexcept { return kind_; }
  std::string const& module() const noexcept { return module_; }

private:
  error_kind kind_;
  std::string module_;
};

} // namespace lutcnn
