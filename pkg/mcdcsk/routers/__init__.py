# Routers module
