logger.info(message)
