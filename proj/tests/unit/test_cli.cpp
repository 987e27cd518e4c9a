#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include <json.hpp>
#include <lutcnn/cli.hpp>

using namespace lutcnn;

namespace
{

struct cli_result
{
  int status = 0;
  std::string out;
  std::string err;
};

cli_result run_cli( std::vector<std::string> args )
{
  args.insert( args.begin(), "lutcnn" );
  std::vector<char const*> argv;
  for ( auto const& a : args )
    argv.push_back( a.c_str() );
  std::ostringstream out, err;
  int const status = cli_main( static_cast<int>( argv.size() ), argv.data(), out, err );
  return { status, out.str(), err.str() };
}

std::string const fixture = std::string( LUTCNN_TEST_DATA ) + "/ecg_c6.json";

std::filesystem::path scratch( std::string const& name )
{
  auto const p = std::filesystem::temp_directory_path() / ( "lutcnn_cli_test_" + name );
  std::filesystem::remove_all( p );
  return p;
}

} // namespace

TEST_CASE( "validate", "[cli]" )
{
  auto const ok = run_cli( { "validate", fixture } );
  CHECK( ok.status == 0 );
  CHECK( ok.out.find( "valid" ) != std::string::npos );

  auto spec = load_model( fixture );
  spec.layers.erase( spec.layers.begin() + 2 );
  auto const bad = scratch( "invalid.json" );
  save_model( spec, bad.string() );
  auto const r = run_cli( { "validate", bad.string() } );
  CHECK( r.status == static_cast<int>( error_kind::structure ) );
  CHECK( r.out.find( "violation" ) != std::string::npos );
  std::filesystem::remove( bad );

  CHECK( run_cli( { "validate", "/nonexistent.json" } ).status == static_cast<int>( error_kind::io ) );
}

TEST_CASE( "cost", "[cli]" )
{
  auto const r = run_cli( { "cost", fixture, "--json" } );
  REQUIRE( r.status == 0 );
  auto const doc = nlohmann::json::parse( r.out );
  CHECK( doc["total"] == 1867 );

  auto const table = run_cli( { "cost", fixture } );
  CHECK( table.out.find( "split1_beta" ) != std::string::npos );
  CHECK( table.out.find( "1867" ) != std::string::npos );
}

TEST_CASE( "search", "[cli]" )
{
  auto const r = run_cli( { "search", "--filter", "12,6,12", "--phi-max", "12", "--json" } );
  REQUIRE( r.status == 0 );
  auto const doc = nlohmann::json::parse( r.out );
  REQUIRE( doc.size() == 1u );
  bool depthwise = false;
  for ( auto const& c : doc[0]["configs"] )
    depthwise |= c["tuple"] == std::vector<int>{ 12, 6, 12, 12, 1, 1, 12 };
  CHECK( depthwise );
  CHECK( doc[0]["enumerated"] == doc[0]["configs"].size() );

  auto const first = nlohmann::json::parse( run_cli( { "search", "--filter", "12,6,12", "--orders", "kernel-first", "--json" } ).out );
  for ( auto const& c : first[0]["configs"] )
    CHECK( c["tuple"][4] == 1 );

  auto const top = nlohmann::json::parse( run_cli( { "search", "--filter", "12,6,12", "--top", "2", "--json" } ).out );
  CHECK( top[0]["configs"].size() == 2u );

  auto const budget = nlohmann::json::parse(
      run_cli( { "search", "--filter", "12,6,12", "--template", "ecg", "--budget-luts", "3000", "--json" } ).out );
  for ( auto const& c : budget[0]["configs"] )
    CHECK( c["network_cost"].get<int>() <= 3000 );

  CHECK( run_cli( { "search", "--filter", "12,6" } ).status == static_cast<int>( error_kind::parse ) );
  CHECK( run_cli( { "search", "--filter", "12,6,10", "--template", "ecg" } ).status == static_cast<int>( error_kind::domain ) );
}

TEST_CASE( "flag errors", "[cli]" )
{
  CHECK( run_cli( {} ).status != 0 );
  CHECK( run_cli( { "frobnicate" } ).status != 0 );
  CHECK( run_cli( { "search" } ).status != 0 ); // --filter is required
  CHECK( run_cli( { "search", "--filter", "1,1,1", "--orders", "sideways" } ).status != 0 );
  CHECK( run_cli( { "--help" } ).status == 0 );
}

TEST_CASE( "compile, simulate and emit", "[cli]" )
{
  auto const dir = scratch( "compile" );
  auto const c = run_cli( { "compile", fixture, "--out", dir.string() } );
  REQUIRE( c.status == 0 );
  CHECK( std::filesystem::exists( dir / "netlist.json" ) );
  CHECK( std::filesystem::exists( dir / "split1_alpha.lutt" ) );
  CHECK( std::filesystem::exists( dir / "output.hex" ) );
  CHECK( c.out.find( "pipeline depth 14" ) != std::string::npos );

  auto const samples = std::string( LUTCNN_TEST_DATA ) + "/ecg_samples.txt";
  auto const golden = read_text_file( std::string( LUTCNN_TEST_DATA ) + "/ecg_golden.txt", "test" );
  auto const from_netlist = run_cli( { "simulate", ( dir / "netlist.json" ).string(), samples, "--window", "400" } );
  CHECK( from_netlist.status == 0 );
  CHECK( from_netlist.out == golden );
  auto const from_model = run_cli( { "simulate", fixture, samples, "--window", "400", "--out", ( dir / "sim.json" ).string() } );
  CHECK( from_model.out == golden );
  auto const sim = nlohmann::json::parse( read_text_file( ( dir / "sim.json" ).string(), "test" ) );
  CHECK( sim["windows"][0]["cycles"] == 414 );

  CHECK( run_cli( { "simulate", fixture, samples, "--window", "399" } ).status == static_cast<int>( error_kind::input ) );
  write_text_file( ( dir / "bad.txt" ).string(), "1\n2\nx3\n", "test" );
  auto const bad = run_cli( { "simulate", fixture, ( dir / "bad.txt" ).string() } );
  CHECK( bad.status == static_cast<int>( error_kind::parse ) );
  CHECK( bad.err.find( "bad.txt:3" ) != std::string::npos );

  CHECK( run_cli( { "compile", fixture, "--window", "300", "--out", dir.string() } ).status == static_cast<int>( error_kind::structure ) );

  auto const hdl = dir / "hdl";
  auto const e = run_cli( { "emit", fixture, "--count", "4", "--out", hdl.string() } );
  CHECK( e.status == 0 );
  CHECK( std::filesystem::exists( hdl / "top.vhd" ) );
  CHECK( std::filesystem::exists( hdl / "pool4.vhd" ) );
  auto const report = nlohmann::json::parse( read_text_file( ( hdl / "report.json" ).string(), "test" ) );
  CHECK( report["total_luts"] == 1867 );
  CHECK( report["verification"]["status"] == "passed" );
  CHECK( report["window_length"] == 311 );
  std::filesystem::remove_all( dir );
}

TEST_CASE( "verify is repeatable", "[cli]" )
{
  auto const a = run_cli( { "verify", fixture, "--count", "5", "--seed", "42" } );
  auto const b = run_cli( { "verify", fixture, "--count", "5", "--seed", "42" } );
  CHECK( a.status == 0 );
  CHECK( a.out == b.out );
  CHECK( nlohmann::json::parse( a.out )["status"] == "passed" );
}
