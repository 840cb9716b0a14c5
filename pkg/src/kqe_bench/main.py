import os
import sys

from .config import GRAM_CACHE_MAX_POINTS, logger, results_dir


def serve():
    """Run the tool server: streamable HTTP when $PORT is set, stdio otherwise."""
    from .server import mcp
    # Import tools and resources to register them
    from . import tools
    from . import resources

    logger.info("Starting Kernel Quantile Discrepancies tool server")
    logger.info(f"Gram cache limit: {GRAM_CACHE_MAX_POINTS} pooled points")
    logger.info(f"Results directory: {results_dir()}")

    port = os.environ.get("PORT")
    if port:
        logger.info(f"Cloud mode: Starting on port {port}")
        mcp.run(transport="streamable-http", port=int(port), host="0.0.0.0")
    else:
        logger.info("Local mode: Using stdio")
        mcp.run()


def main():
    from .cli import run
    sys.exit(run())


if __name__ == "__main__":
    main()
