/*!
  \file bit_vector.hpp
  \brief Packed dynamic bit vector
*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lutcnn
{

/*! \brief Fixed-size sequence of bits packed into 64-bit words.
 *
 * Bit `i` lives in word `i / 64` at position `i % 64`. Unused high bits of
 * the last word are always zero, so equality compares words directly.
 */
class bit_vector
{
public:
  bit_vector() = default;
  explicit bit_vector( std::size_t size, bool value = false )
      : size_( size ), words_( ( size + 63u ) / 64u, value ? ~std::uint64_t{ 0 } : 0u )
  {
    clear_tail();
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0u; }

  bool get( std::size_t i ) const noexcept
  {
    return ( words_[i >> 6] >> ( i & 63u ) ) & 1u;
  }

  void set( std::size_t i, bool value ) noexcept
  {
    auto const mask = std::uint64_t{ 1 } << ( i & 63u );
    if ( value )
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  void flip( std::size_t i ) noexcept { words_[i >> 6] ^= std::uint64_t{ 1 } << ( i & 63u ); }

  bool operator[]( std::size_t i ) const noexcept { return get( i ); }

  std::vector<std::uint64_t> const& words() const noexcept { return words_; }

  std::size_t count() const noexcept
  {
    std::size_t n = 0;
    for ( auto w : words_ )
      n += static_cast<std::size_t>( __builtin_popcountll( w ) );
    return n;
  }

  friend bool operator==( bit_vector const&, bit_vector const& ) = default;

private:
  void clear_tail() noexcept
  {
    if ( size_ % 64u != 0u && !words_.empty() )
      words_.back() &= ( std::uint64_t{ 1 } << ( size_ % 64u ) ) - 1u;
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

} // namespace lutcnn
